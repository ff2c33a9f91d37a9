//! Dense truncated-lattice oracle shared by the integration targets. It builds
//! `S` and `C ⊗ I` as explicit matrices and multiplies them out.

use dtqw_core::coin::{Complex2x2, C64};
use dtqw_core::walk::{CoinPolicy, InitialCoin, WalkState};
use nalgebra::{DMatrix, DVector};

/// Full walk on a lattice of `2R + 1` sites with explicit operators.
/// Basis index is `2·(j + R) + coin`.
pub struct DenseLattice {
    pub radius: i64,
}

impl DenseLattice {
    pub fn dim(&self) -> usize {
        2 * (2 * self.radius as usize + 1)
    }

    pub fn index(&self, j: i64, c: usize) -> usize {
        2 * (j + self.radius) as usize + c
    }

    pub fn shift(&self) -> DMatrix<C64> {
        let mut s = DMatrix::zeros(self.dim(), self.dim());
        for j in -self.radius..=self.radius {
            if j < self.radius {
                s[(self.index(j + 1, 0), self.index(j, 0))] = C64::new(1.0, 0.0);
            }
            if j > -self.radius {
                s[(self.index(j - 1, 1), self.index(j, 1))] = C64::new(1.0, 0.0);
            }
        }
        s
    }

    pub fn coin(&self, coin_at: impl Fn(i64) -> Complex2x2) -> DMatrix<C64> {
        let mut c = DMatrix::zeros(self.dim(), self.dim());
        for j in -self.radius..=self.radius {
            let u = coin_at(j);
            for r in 0..2 {
                for k in 0..2 {
                    c[(self.index(j, r), self.index(j, k))] = u.get(r, k);
                }
            }
        }
        c
    }
}

pub fn dense_final(init: &InitialCoin, policy: &CoinPolicy, steps: usize) -> DVector<C64> {
    let lattice = DenseLattice { radius: steps as i64 + 1 };
    let schedule = policy.resolve(steps).unwrap();
    let mut psi = DVector::zeros(lattice.dim());
    let spinor = init.spinor();
    psi[lattice.index(0, 0)] = spinor[0];
    psi[lattice.index(0, 1)] = spinor[1];
    let s = lattice.shift();
    for step in 0..steps {
        let c = lattice.coin(|j| *schedule.coin_at(step, j));
        psi = &s * (&c * psi);
    }
    psi
}

pub fn max_deviation(state: &WalkState, dense: &DVector<C64>, radius: i64) -> f64 {
    let lattice = DenseLattice { radius };
    let mut worst = 0.0f64;
    for j in -radius..=radius {
        let s = state.spinor(j);
        for c in 0..2 {
            worst = worst.max((s[c] - dense[lattice.index(j, c)]).norm());
        }
    }
    worst
}
