//! Reduced coin state and the coin-position von Neumann entropy.

use serde::Serialize;

use crate::coin::{Complex2x2, Spinor, C64};
use crate::error::{Error, Result};
use crate::walk::{evolution, CoinPolicy, InitialCoin, WalkState};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// States whose norm is further than this from one are refused.
pub const NORM_TOL: f64 = 1e-6;
/// Sites at or below this probability have no local density matrix.
pub const EMPTY_SITE: f64 = 1e-14;
/// Eigenvalues at or below this contribute nothing to the entropy.
const EIGEN_FLOOR: f64 = 1e-12;

/// Hermitian, trace-one, positive semidefinite 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityMatrix2(Complex2x2);

impl DensityMatrix2 {
    pub fn new(m: Complex2x2) -> Result<Self> {
        let herm = (m.get(0, 1) - m.get(1, 0).conj())
            .norm()
            .max(m.get(0, 0).im.abs())
            .max(m.get(1, 1).im.abs());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        let rho = Self(m);
        let [low, _] = rho.eigenvalues();
        if low < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {low:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Hermitian matrix from its diagonal and upper off-diagonal entry,
    /// without validation.
    pub(crate) fn from_parts(p00: f64, p11: f64, c01: C64) -> Self {
        Self(Complex2x2::new(p00.into(), c01, c01.conj(), p11.into()))
    }

    /// `|χ⟩⟨χ|` for a non-zero spinor, normalized.
    pub fn pure(spinor: &Spinor) -> Result<Self> {
        let n = spinor[0].norm_sqr() + spinor[1].norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::Unnormalized { norm: n.sqrt() });
        }
        Ok(Self::from_parts(
            spinor[0].norm_sqr() / n,
            spinor[1].norm_sqr() / n,
            spinor[0] * spinor[1].conj() / n,
        ))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_parts(0.5, 0.5, C64::new(0.0, 0.0))
    }

    pub fn diagonal(p0: f64) -> Result<Self> {
        Self::new(Complex2x2::new(p0.into(), 0.0.into(), 0.0.into(), (1.0 - p0).into()))
    }

    /// `(I + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new(Complex2x2::new(
            ((1.0 + z) / 2.0).into(),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            ((1.0 - z) / 2.0).into(),
        ))
    }

    /// `(r_x, r_y, r_z)` with `r_k = Tr(ρ σ_k)`.
    pub fn bloch(&self) -> [f64; 3] {
        let c = self.0.get(0, 1);
        [2.0 * c.re, -2.0 * c.im, self.0.get(0, 0).re - self.0.get(1, 1).re]
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    /// `[λ₋, λ₊] = 1/2 ∓ √((ρ₀₀ − ρ₁₁)²/4 + |ρ₀₁|²)`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_diff = (self.0.get(0, 0).re - self.0.get(1, 1).re) / 2.0;
        let mean = (self.0.get(0, 0).re + self.0.get(1, 1).re) / 2.0;
        let radius = half_diff.hypot(self.0.get(0, 1).norm());
        [mean - radius, mean + radius]
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.eigenvalues()[0] <= tol
    }

    pub fn determinant(&self) -> f64 {
        self.0.det().re
    }
}

/// `ρ_C = Tr_P |Ψ⟩⟨Ψ|`, entrywise `ρ₀₀ = Σ|a|²`, `ρ₀₁ = Σ a·b̄`, `ρ₁₁ = Σ|b|²`.
pub fn reduced_coin_density(state: &WalkState) -> Result<DensityMatrix2> {
    let (mut p00, mut p11, mut c01) = (0.0, 0.0, C64::new(0.0, 0.0));
    for s in state.amplitudes() {
        p00 += s[0].norm_sqr();
        p11 += s[1].norm_sqr();
        c01 += s[0] * s[1].conj();
    }
    let norm = p00 + p11;
    if (norm.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized { norm: norm.sqrt() });
    }
    Ok(DensityMatrix2::from_parts(p00 / norm, p11 / norm, c01 / norm))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteRecord {
    pub site: i64,
    pub probability: f64,
    pub rho: DensityMatrix2,
}

/// `ρ_C = Σ_j p_j ρ_j` split into its sitewise parts. Sites with
/// `p_j ≤ 1e-14` are left out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteDecomposition {
    pub records: Vec<SiteRecord>,
}

impl SiteDecomposition {
    /// Recombines `Σ_j p_j ρ_j`.
    pub fn mixture(&self) -> Result<DensityMatrix2> {
        let mut acc = Complex2x2::new(0.0.into(), 0.0.into(), 0.0.into(), 0.0.into());
        let mut total = 0.0;
        for r in &self.records {
            acc = Complex2x2::new(
                acc.get(0, 0) + r.rho.get(0, 0) * r.probability,
                acc.get(0, 1) + r.rho.get(0, 1) * r.probability,
                acc.get(1, 0) + r.rho.get(1, 0) * r.probability,
                acc.get(1, 1) + r.rho.get(1, 1) * r.probability,
            );
            total += r.probability;
        }
        DensityMatrix2::new(acc.scale((1.0 / total).into()))
    }

    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.probability).sum()
    }
}

pub fn site_decomposition(state: &WalkState) -> Result<SiteDecomposition> {
    let norm = state.norm_sqr();
    if (norm.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized { norm: norm.sqrt() });
    }
    let mut records = Vec::new();
    for (site, s) in state.sites() {
        let p = s[0].norm_sqr() + s[1].norm_sqr();
        if p > EMPTY_SITE {
            records.push(SiteRecord {
                site,
                probability: p / norm,
                rho: DensityMatrix2::pure(s)?,
            });
        }
    }
    Ok(SiteDecomposition { records })
}

/// `−Σ λ log₂ λ` over the two eigenvalues, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix2) -> f64 {
    entropy_of_eigenvalues(rho.eigenvalues())
}

pub(crate) fn entropy_of_eigenvalues(eigenvalues: [f64; 2]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > EIGEN_FLOOR)
        .map(|l| -l * l.log2())
        .sum();
    s.clamp(0.0, 1.0)
}

/// Entropy of the reduced coin state of `state`.
pub fn entanglement_entropy(state: &WalkState) -> Result<f64> {
    Ok(von_neumann_entropy(&reduced_coin_density(state)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub t: usize,
    pub entropy: f64,
    /// `[λ₋, λ₊]` of the reduced coin state.
    pub eigenvalues: [f64; 2],
}

/// `S_E(t)` for `t = 0..=steps`.
pub fn entropy_curve(
    init: &InitialCoin,
    policy: &CoinPolicy,
    steps: usize,
) -> Result<Vec<EntropyPoint>> {
    evolution(init, policy, steps)?
        .map(|state| {
            let rho = reduced_coin_density(&state)?;
            Ok(EntropyPoint {
                t: state.t(),
                entropy: von_neumann_entropy(&rho),
                eigenvalues: rho.eigenvalues(),
            })
        })
        .collect()
}

/// Window `[end − len + 1, end]` over which the long-time entropy is averaged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailWindow {
    pub end: usize,
    pub len: usize,
}

impl Default for TailWindow {
    fn default() -> Self {
        Self { end: 1024, len: 64 }
    }
}

impl TailWindow {
    pub fn start(&self) -> usize {
        self.end + 1 - self.len
    }
}

/// Mean of `S_E(t)` over the tail window: the value the oscillating curve
/// settles around.
pub fn asymptotic_entropy(
    init: &InitialCoin,
    policy: &CoinPolicy,
    window: TailWindow,
) -> Result<f64> {
    if window.len == 0 || window.len > window.end {
        return Err(Error::InvalidArgument(format!(
            "tail window of {} steps ending at {}",
            window.len, window.end
        )));
    }
    let start = window.start();
    let mut sum = 0.0;
    for state in evolution(init, policy, window.end)?.skip(start) {
        sum += entanglement_entropy(&state)?;
    }
    Ok(sum / window.len as f64)
}
