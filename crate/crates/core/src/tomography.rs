//! Emulated measurement chain: sitewise polarization projections with shot
//! noise, linear-inversion reconstruction, and fidelity/similarity scores.
//!
//! Projector convention: `|H⟩ = |↑⟩`, `|V⟩ = |↓⟩`, `|D⟩ = (|↑⟩+|↓⟩)/√2`,
//! `|A⟩ = (|↑⟩−|↓⟩)/√2`, `|L⟩ = (|↑⟩+i|↓⟩)/√2`, `|R⟩ = (|↑⟩−i|↓⟩)/√2`.
//! With this choice `L`/`R` are the `±1` eigenstates of `σ_y`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::coin::C64;
use crate::entanglement::{
    reduced_coin_density, von_neumann_entropy, DensityMatrix2, EMPTY_SITE,
};
use crate::error::{Error, Result};
use crate::transport::PositionDistribution;
use crate::walk::WalkState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    H,
    V,
    D,
    A,
    L,
    R,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::H,
        Outcome::V,
        Outcome::D,
        Outcome::A,
        Outcome::L,
        Outcome::R,
    ];

    pub fn basis(&self) -> Basis {
        match self {
            Outcome::H | Outcome::V => Basis::HV,
            Outcome::D | Outcome::A => Basis::DA,
            Outcome::L | Outcome::R => Basis::LR,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Measurement basis; outcomes `2k` and `2k + 1` of [`Outcome::ALL`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Basis {
    HV,
    DA,
    LR,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::HV, Basis::DA, Basis::LR];

    fn index(&self) -> usize {
        match self {
            Basis::HV => 0,
            Basis::DA => 1,
            Basis::LR => 2,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Basis::HV => "HV",
            Basis::DA => "DA",
            Basis::LR => "LR",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Joint probabilities of finding the walker at `j` with each polarization
/// outcome, in [`Outcome::ALL`] order. Each basis pair sums to `p_j`.
pub fn projector_probabilities(state: &WalkState, j: i64) -> Result<[f64; 6]> {
    let [a, b] = state.spinor(j);
    if a.norm_sqr() + b.norm_sqr() <= EMPTY_SITE {
        return Err(Error::EmptySite { site: j });
    }
    let i = C64::new(0.0, 1.0);
    Ok([
        a.norm_sqr(),
        b.norm_sqr(),
        (a + b).norm_sqr() / 2.0,
        (a - b).norm_sqr() / 2.0,
        (a - i * b).norm_sqr() / 2.0,
        (a + i * b).norm_sqr() / 2.0,
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountMode {
    /// Multinomial shot noise from ChaCha8 seeded with `seed`.
    Shots { seed: u64 },
    /// Counts replaced by their (real-valued) expectations.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteCounts {
    pub site: i64,
    /// In [`Outcome::ALL`] order. Integer-valued under shot noise.
    pub counts: [f64; 6],
}

impl SiteCounts {
    pub fn pair_total(&self, basis: Basis) -> f64 {
        let k = 2 * basis.index();
        self.counts[k] + self.counts[k + 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionCounts {
    pub total_counts: u64,
    pub mode: CountMode,
    pub sites: Vec<SiteCounts>,
}

/// Splits the budget equally over the three bases (remainder to the first
/// ones) and draws each basis' counts over all `(site, outcome)` cells.
pub fn simulate_counts(state: &WalkState, total_counts: u64, mode: CountMode) -> Result<ProjectionCounts> {
    if total_counts == 0 {
        return Err(Error::NoCounts);
    }
    let mut probs = Vec::new();
    for (j, s) in state.sites() {
        if s[0].norm_sqr() + s[1].norm_sqr() > EMPTY_SITE {
            probs.push((j, projector_probabilities(state, j)?));
        }
    }
    let norm = state.norm_sqr();
    let mut sites: Vec<SiteCounts> = probs
        .iter()
        .map(|&(site, _)| SiteCounts {
            site,
            counts: [0.0; 6],
        })
        .collect();
    let mut rng = match mode {
        CountMode::Shots { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        CountMode::Expected => None,
    };
    for basis in Basis::ALL {
        let k = basis.index();
        let budget = total_counts / 3 + u64::from((k as u64) < total_counts % 3);
        match rng.as_mut() {
            None => {
                for (slot, (_, p)) in sites.iter_mut().zip(&probs) {
                    slot.counts[2 * k] = budget as f64 * p[2 * k] / norm;
                    slot.counts[2 * k + 1] = budget as f64 * p[2 * k + 1] / norm;
                }
            }
            Some(rng) => {
                // multinomial as a chain of conditional binomials
                let mut remaining = budget;
                let mut mass = 1.0;
                for (slot, (_, p)) in sites.iter_mut().zip(&probs) {
                    for o in [2 * k, 2 * k + 1] {
                        let q = p[o] / norm;
                        let draw = if remaining == 0 || mass <= 0.0 {
                            0
                        } else {
                            let cond = (q / mass).clamp(0.0, 1.0);
                            Binomial::new(remaining, cond)
                                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                                .sample(rng)
                        };
                        slot.counts[o] = draw as f64;
                        remaining -= draw;
                        mass -= q;
                    }
                }
            }
        }
    }
    Ok(ProjectionCounts {
        total_counts,
        mode,
        sites,
    })
}

fn stokes(plus: f64, minus: f64) -> Option<f64> {
    let total = plus + minus;
    (total > 0.0).then(|| (plus - minus) / total)
}

/// Physical state nearest to the Stokes vector `r`: for `|r| > 1` the
/// negative eigenvalue is clamped to zero and the trace renormalized, which
/// for a qubit leaves the pure state along `r / |r|`.
fn physical_from_stokes(r: [f64; 3]) -> Result<DensityMatrix2> {
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = if len > 1.0 { r.map(|x| x / len) } else { r };
    DensityMatrix2::from_bloch(r)
}

/// Linear inversion `ρ = (I + r·σ)/2` with `r_k = (N₊ − N₋)/(N₊ + N₋)`.
pub fn reconstruct_site(counts: &SiteCounts) -> Result<DensityMatrix2> {
    let c = &counts.counts;
    let component = |basis: Basis| -> Result<f64> {
        let k = 2 * basis.index();
        stokes(c[k], c[k + 1]).ok_or(Error::ZeroCounts {
            site: counts.site,
            pair: basis.name(),
        })
    };
    let rz = component(Basis::HV)?;
    let rx = component(Basis::DA)?;
    let ry = component(Basis::LR)?;
    physical_from_stokes([rx, ry, rz])
}

/// Same as [`reconstruct_site`] but a basis with no counts contributes a zero
/// Stokes component.
fn reconstruct_partial(counts: &SiteCounts) -> Result<DensityMatrix2> {
    let c = &counts.counts;
    let rz = stokes(c[0], c[1]).unwrap_or(0.0);
    let rx = stokes(c[2], c[3]).unwrap_or(0.0);
    let ry = stokes(c[4], c[5]).unwrap_or(0.0);
    physical_from_stokes([rx, ry, rz])
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`, via the qubit identity
/// `Tr(ab) + 2√(det a · det b)`.
pub fn fidelity(a: &DensityMatrix2, b: &DensityMatrix2) -> f64 {
    let overlap = (*a.matrix() * *b.matrix()).trace().re;
    let dets = (a.determinant().max(0.0) * b.determinant().max(0.0)).sqrt();
    (overlap + 2.0 * dets).clamp(0.0, 1.0)
}

/// Bhattacharyya coefficient `Σ_x √(P(x) Q(x))`.
pub fn similarity(p: &PositionDistribution, q: &PositionDistribution) -> Result<f64> {
    for d in [p, q] {
        let sum = d.total();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedDistribution { sum });
        }
    }
    let s: f64 = p
        .points()
        .iter()
        .map(|&(j, pj)| (pj * q.probability(j)).sqrt())
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteEstimate {
    pub site: i64,
    pub probability: f64,
    pub true_probability: f64,
    pub rho: DensityMatrix2,
    /// Against the exact local state; absent where the exact site is empty.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomographyResult {
    pub total_counts: u64,
    pub mode: CountMode,
    pub sites: Vec<SiteEstimate>,
    pub rho_c: DensityMatrix2,
    pub entropy: f64,
    pub exact_entropy: f64,
    pub rho_c_fidelity: f64,
    /// Similarity of the estimated and exact position distributions.
    pub similarity: f64,
    pub min_site_fidelity: f64,
}

/// Counts → per-site reconstruction → `ρ̂_C = Σ p̂_j ρ̂_j` → `Ŝ_E`.
/// `p̂_j` comes from the H/V counts alone.
pub fn tomographic_entropy(state: &WalkState, total_counts: u64, mode: CountMode) -> Result<TomographyResult> {
    let counts = simulate_counts(state, total_counts, mode)?;
    estimate_from_counts(state, &counts)
}

/// Reconstruction from already available counts; `state` is the ground truth
/// used for scoring.
pub fn estimate_from_counts(state: &WalkState, counts: &ProjectionCounts) -> Result<TomographyResult> {
    let hv_total: f64 = counts.sites.iter().map(|s| s.pair_total(Basis::HV)).sum();
    if hv_total <= 0.0 {
        return Err(Error::NoCounts);
    }
    let norm = state.norm_sqr();
    let mut sites = Vec::new();
    let (mut p00, mut p11, mut c01) = (0.0, 0.0, C64::new(0.0, 0.0));
    for sc in &counts.sites {
        let hv = sc.pair_total(Basis::HV);
        if hv <= 0.0 {
            continue;
        }
        let p_hat = hv / hv_total;
        let rho = reconstruct_partial(sc)?;
        p00 += p_hat * rho.get(0, 0).re;
        p11 += p_hat * rho.get(1, 1).re;
        c01 += rho.get(0, 1) * p_hat;
        let spinor = state.spinor(sc.site);
        let p_true = (spinor[0].norm_sqr() + spinor[1].norm_sqr()) / norm;
        let fid = if p_true > EMPTY_SITE {
            Some(fidelity(&rho, &DensityMatrix2::pure(&spinor)?))
        } else {
            None
        };
        sites.push(SiteEstimate {
            site: sc.site,
            probability: p_hat,
            true_probability: p_true,
            rho,
            fidelity: fid,
        });
    }
    let trace = p00 + p11;
    let rho_c = DensityMatrix2::new(crate::coin::Complex2x2::new(
        (p00 / trace).into(),
        c01 / trace,
        c01.conj() / trace,
        (p11 / trace).into(),
    ))?;
    let exact = reduced_coin_density(state)?;
    let estimated_dist = PositionDistribution::new(sites.iter().map(|s| (s.site, s.probability)).collect())?;
    let exact_dist = PositionDistribution::from_state(state);
    let exact_dist = PositionDistribution::new(
        exact_dist.points().iter().map(|&(j, p)| (j, p / norm)).collect(),
    )?;
    let min_site_fidelity = sites
        .iter()
        .filter_map(|s| s.fidelity)
        .fold(1.0_f64, f64::min);
    Ok(TomographyResult {
        total_counts: counts.total_counts,
        mode: counts.mode,
        entropy: von_neumann_entropy(&rho_c),
        exact_entropy: von_neumann_entropy(&exact),
        rho_c_fidelity: fidelity(&rho_c, &exact),
        similarity: similarity(&estimated_dist, &exact_dist)?,
        min_site_fidelity,
        rho_c,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::hadamard_coin;
    use crate::walk::{final_state, CoinPolicy, InitialCoin};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn localized(a: C64, b: C64) -> WalkState {
        WalkState::localized([a, b])
    }

    fn one_step() -> WalkState {
        WalkState::initial(&InitialCoin::new(0.0, 0.0).unwrap())
            .step(&hadamard_coin())
            .unwrap()
    }

    fn assert_probs(got: [f64; 6], expected: [f64; 6]) {
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-15, "{got:?} vs {expected:?}");
        }
    }

    #[test]
    fn projector_probabilities_of_basis_states() {
        let up = localized(1.0.into(), 0.0.into());
        assert_probs(projector_probabilities(&up, 0).unwrap(), [1.0, 0.0, 0.5, 0.5, 0.5, 0.5]);

        let circ = localized(FRAC_1_SQRT_2.into(), C64::new(0.0, FRAC_1_SQRT_2));
        assert_probs(projector_probabilities(&circ, 0).unwrap(), [0.5, 0.5, 0.5, 0.5, 1.0, 0.0]);

        let p = projector_probabilities(&one_step(), 1).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1].abs() < 1e-15);
        assert_eq!(projector_probabilities(&one_step(), 0).unwrap_err(), Error::EmptySite { site: 0 });
    }

    #[test]
    fn expected_counts_follow_the_budget() {
        let counts = simulate_counts(&one_step(), 24_000, CountMode::Expected).unwrap();
        let site1 = counts.sites.iter().find(|s| s.site == 1).unwrap();
        assert!((site1.counts[0] - 4000.0).abs() < 1e-9);
        let total: f64 = counts.sites.iter().flat_map(|s| s.counts).sum();
        assert!((total - 24_000.0).abs() < 1e-9);
    }

    #[test]
    fn shot_counts_are_near_expectation() {
        // H outcome at j = 1 has joint probability 1/2 within the HV budget of 8000
        let expected = 24_000.0 / 3.0 / 2.0;
        let sigma = (8000.0_f64 * 0.5 * 0.5).sqrt();
        let counts = simulate_counts(&one_step(), 24_000, CountMode::Shots { seed: 11 }).unwrap();
        let site1 = counts.sites.iter().find(|s| s.site == 1).unwrap();
        assert!((site1.counts[0] - expected).abs() < 5.0 * sigma);
        let total: f64 = counts.sites.iter().flat_map(|s| s.counts).sum();
        assert_eq!(total, 24_000.0);
        for s in &counts.sites {
            assert!(s.counts.iter().all(|&c| c >= 0.0 && c.fract() == 0.0));
        }
        let again = simulate_counts(&one_step(), 24_000, CountMode::Shots { seed: 11 }).unwrap();
        assert_eq!(counts, again);
    }

    #[test]
    fn zero_budget_rejected() {
        assert_eq!(
            simulate_counts(&one_step(), 0, CountMode::Expected).unwrap_err(),
            Error::NoCounts
        );
    }

    #[test]
    fn noiseless_round_trip_of_a_pure_site() {
        let up = localized(1.0.into(), 0.0.into());
        let counts = simulate_counts(&up, 3000, CountMode::Expected).unwrap();
        let rho = reconstruct_site(&counts.sites[0]).unwrap();
        let truth = DensityMatrix2::pure(&[1.0.into(), 0.0.into()]).unwrap();
        assert!(rho.matrix().max_abs_diff(truth.matrix()) < 1e-12);
    }

    #[test]
    fn adversarial_counts_are_projected() {
        // r = (0.9, 0.9, 0.9), |r| ≈ 1.56
        let counts = SiteCounts {
            site: 0,
            counts: [95.0, 5.0, 95.0, 5.0, 95.0, 5.0],
        };
        let rho = reconstruct_site(&counts).unwrap();
        let [lo, hi] = rho.eigenvalues();
        assert!(lo >= -1e-12 && (lo + hi - 1.0).abs() < 1e-12);
        let r = rho.bloch();
        for x in r {
            assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_requires_every_basis() {
        let counts = SiteCounts {
            site: 4,
            counts: [10.0, 0.0, 0.0, 0.0, 3.0, 3.0],
        };
        assert_eq!(
            reconstruct_site(&counts).unwrap_err(),
            Error::ZeroCounts { site: 4, pair: "DA" }
        );
    }

    #[test]
    fn fidelity_reference_values() {
        let up = DensityMatrix2::pure(&[1.0.into(), 0.0.into()]).unwrap();
        let down = DensityMatrix2::pure(&[0.0.into(), 1.0.into()]).unwrap();
        let mixed = DensityMatrix2::maximally_mixed();
        assert!((fidelity(&up, &up) - 1.0).abs() < 1e-15);
        assert!(fidelity(&up, &down).abs() < 1e-15);
        assert!((fidelity(&up, &mixed) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn similarity_reference_values() {
        let p = PositionDistribution::new(vec![(0, 1.0)]).unwrap();
        let q = PositionDistribution::new(vec![(0, 0.5), (2, 0.5)]).unwrap();
        let r = PositionDistribution::new(vec![(5, 1.0)]).unwrap();
        assert!((similarity(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(similarity(&p, &r).unwrap().abs() < 1e-15);
        assert!((similarity(&p, &q).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((similarity(&q, &p).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_tomography_reproduces_exact_entropy() {
        let init = InitialCoin::new(51.0, 0.0).unwrap();
        let state = final_state(&init, &CoinPolicy::hadamard(), 20).unwrap();
        let result = tomographic_entropy(&state, 24_000, CountMode::Expected).unwrap();
        assert!((result.entropy - result.exact_entropy).abs() < 1e-9);
        assert!((result.rho_c_fidelity - 1.0).abs() < 1e-10);
        assert!((result.min_site_fidelity - 1.0).abs() < 1e-10);
        assert!((result.similarity - 1.0).abs() < 1e-10);
    }
}
