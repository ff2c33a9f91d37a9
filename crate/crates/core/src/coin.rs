//! Two-by-two coin operators acting on the walker's internal qubit.
//!
//! Basis order is `{|↑⟩, |↓⟩}` throughout, which the optical setup identifies
//! with horizontal and vertical polarization.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Coin-space amplitudes `(a, b)` of `a|↑⟩ + b|↓⟩`.
pub type Spinor = [C64; 2];

/// Tolerance used when a coin is accepted as input to an operation.
pub const UNITARY_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex2x2(pub [[C64; 2]; 2]);

impl Complex2x2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self::new(
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        )
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        let m = &self.0;
        Self::new(c * m[0][0], c * m[0][1], c * m[1][0], c * m[1][1])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    #[inline]
    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entrywise deviation of `U U†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = *self * self.adjoint();
        let id = Self::identity();
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Returns `self` if it is unitary within [`UNITARY_TOL`].
    pub fn ensure_unitary(self) -> Result<Self> {
        let deviation = self.unitarity_deviation();
        if deviation <= UNITARY_TOL {
            Ok(self)
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }
}

impl Mul for Complex2x2 {
    type Output = Complex2x2;

    fn mul(self, rhs: Complex2x2) -> Complex2x2 {
        let a = &self.0;
        let b = &rhs.0;
        Complex2x2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl fmt::Display for Complex2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

/// `(1/√2) [[1, 1], [1, −1]]`.
pub fn hadamard_coin() -> Complex2x2 {
    Complex2x2::from_real([[1.0, 1.0], [1.0, -1.0]]).scale(FRAC_1_SQRT_2.into())
}

/// `(1/√2) [[1, i], [i, 1]]`.
pub fn fourier_coin() -> Complex2x2 {
    Complex2x2::new(ONE, I, I, ONE).scale(FRAC_1_SQRT_2.into())
}

/// `exp(−i·angle·σ_y)`, a real rotation.
fn y_rotation(angle: f64) -> Complex2x2 {
    let (s, c) = angle.sin_cos();
    Complex2x2::from_real([[c, -s], [s, c]])
}

/// `exp(−i·angle·σ_z)`.
fn z_phase(angle: f64) -> Complex2x2 {
    Complex2x2::new(C64::from_polar(1.0, -angle), ZERO, ZERO, C64::from_polar(1.0, angle))
}

/// Half-wave plate with its optical axis at `angle` radians:
/// `exp(−2i·angle·σ_y)·σ_z`. At `π/8` this is exactly the Hadamard coin.
pub fn hwp_coin(angle: f64) -> Complex2x2 {
    y_rotation(2.0 * angle) * Complex2x2::pauli_z()
}

/// Quarter-wave plate with its optical axis at `angle` radians:
/// `exp(−i·angle·σ_y)·exp(−i(π/4)σ_z)·exp(i·angle·σ_y)`. At `−π/4` this is the
/// Fourier coin.
pub fn qwp_coin(angle: f64) -> Complex2x2 {
    y_rotation(angle) * z_phase(FRAC_PI_4) * y_rotation(-angle)
}

/// `min_{|c|=1} ‖u − c·v‖_F`, i.e. the distance between two unitaries once a
/// global phase is factored out.
pub fn phase_invariant_distance(u: &Complex2x2, v: &Complex2x2) -> Result<f64> {
    u.ensure_unitary()?;
    v.ensure_unitary()?;
    // computed directly rather than from ‖u‖² + ‖v‖² − 2|Tr(u†v)|, which cancels
    let overlap = (v.adjoint() * *u).trace();
    let c = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut sum = 0.0;
    for r in 0..2 {
        for k in 0..2 {
            sum += (u.0[r][k] - c * v.0[r][k]).norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// The phase `c` (as an angle) minimising `‖u − c·v‖_F`, i.e. `u ≈ e^{iφ} v`.
pub fn relative_phase(u: &Complex2x2, v: &Complex2x2) -> f64 {
    (v.adjoint() * *u).trace().arg()
}
