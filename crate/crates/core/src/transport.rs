//! Position distributions, second moments and power-law spreading fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::Complex2x2;
use crate::error::{Error, Result};
use crate::walk::{evolution, CoinPolicy, InitialCoin, WalkState};

pub const DISTRIBUTION_TOL: f64 = 1e-10;

/// `(j, p_j)` in ascending site order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    points: Vec<(i64, f64)>,
}

impl PositionDistribution {
    /// Sorts by site; rejects negative entries, duplicate sites and sums that
    /// differ from one by more than `1e-10`.
    pub fn new(mut points: Vec<(i64, f64)>) -> Result<Self> {
        points.sort_by_key(|&(j, _)| j);
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate site in distribution".into()));
        }
        if points.iter().any(|&(_, p)| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidArgument("negative or NaN probability".into()));
        }
        let sum: f64 = points.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::UnnormalizedDistribution { sum });
        }
        Ok(Self { points })
    }

    /// Every stored site of the state, zeros included.
    pub fn from_state(state: &WalkState) -> Self {
        Self {
            points: state
                .sites()
                .map(|(j, s)| (j, s[0].norm_sqr() + s[1].norm_sqr()))
                .collect(),
        }
    }

    pub fn points(&self) -> &[(i64, f64)] {
        &self.points
    }

    pub fn probability(&self, j: i64) -> f64 {
        self.points
            .binary_search_by_key(&j, |&(site, _)| site)
            .map(|k| self.points[k].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).sum()
    }
}

pub fn position_distribution(state: &WalkState) -> PositionDistribution {
    PositionDistribution::from_state(state)
}

/// `Σ_j p_j j²` about the launch site.
pub fn second_moment(dist: &PositionDistribution) -> f64 {
    dist.points
        .iter()
        .map(|&(j, p)| p * (j as f64) * (j as f64))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub t: u32,
    pub m2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub points: Vec<MomentPoint>,
}

impl MomentSeries {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            points: pairs
                .into_iter()
                .map(|(t, m2)| MomentPoint { t, m2 })
                .collect(),
        }
    }

    pub fn at(&self, t: u32) -> Option<f64> {
        self.points.iter().find(|p| p.t == t).map(|p| p.m2)
    }

    /// Points with `t_min ≤ t ≤ t_max`.
    pub fn window(&self, t_min: u32, t_max: u32) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| (t_min..=t_max).contains(&p.t))
                .collect(),
        }
    }
}

/// `m2(t)` for `t = 0..=steps`.
pub fn moment_series(init: &InitialCoin, policy: &CoinPolicy, steps: usize) -> Result<MomentSeries> {
    Ok(MomentSeries::from_pairs(evolution(init, policy, steps)?.map(
        |state| (state.t() as u32, second_moment(&PositionDistribution::from_state(&state))),
    )))
}

/// `m2(t)` averaged over `realizations` dynamically random walks with seeds
/// `base_seed, base_seed + 1, …`.
pub fn ensemble_moment_series(
    init: &InitialCoin,
    alphabet: [Complex2x2; 2],
    steps: usize,
    realizations: usize,
    base_seed: u64,
) -> Result<MomentSeries> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("need at least one realization".into()));
    }
    let runs = (0..realizations as u64)
        .into_par_iter()
        .map(|k| {
            let policy = CoinPolicy::DynamicRandom {
                alphabet,
                seed: base_seed.wrapping_add(k),
            };
            moment_series(init, &policy, steps)
        })
        .collect::<Result<Vec<_>>>()?;
    // summed in seed order so the result does not depend on scheduling
    let mut acc = vec![0.0; steps + 1];
    for run in &runs {
        for (slot, p) in acc.iter_mut().zip(&run.points) {
            *slot += p.m2;
        }
    }
    Ok(MomentSeries::from_pairs(
        acc.into_iter()
            .enumerate()
            .map(|(t, sum)| (t as u32, sum / realizations as f64)),
    ))
}

/// Unbiased classical random walk from the origin: `m2(t) = t`.
pub fn classical_baseline(steps: u32) -> MomentSeries {
    MomentSeries::from_pairs((0..=steps).map(|t| (t, t as f64)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Least squares on `m2` itself, seeded by the log-log solution.
    #[default]
    Direct,
    /// Ordinary least squares of `ln m2` on `ln t`.
    LogLog,
}

/// `m2 ≈ prefactor · t^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS of `ln m2 − ln(prefactor·t^exponent)` over the fitted points.
    pub residual: f64,
    pub t_min: u32,
    pub t_max: u32,
    pub points: usize,
    pub method: FitMethod,
}

impl PowerLawFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.prefactor * t.powf(self.exponent)
    }
}

pub fn fit_power_law(series: &MomentSeries, t_min: u32, method: FitMethod) -> Result<PowerLawFit> {
    if t_min == 0 {
        return Err(Error::InvalidArgument("t_min must be at least 1".into()));
    }
    let pts: Vec<MomentPoint> = series
        .points
        .iter()
        .copied()
        .filter(|p| p.t >= t_min)
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            found: pts.len(),
            t_min,
        });
    }
    if let Some(p) = pts.iter().find(|p| p.m2.is_nan() || p.m2 <= 0.0) {
        return Err(Error::NonPositiveMoment { t: p.t });
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.t as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.m2.ln()).collect();
    let (ln_c, alpha) = log_log_ols(&xs, &ys)?;
    let (prefactor, exponent) = match method {
        FitMethod::LogLog => (ln_c.exp(), alpha),
        FitMethod::Direct => direct_least_squares(&pts, ln_c.exp(), alpha)?,
    };
    let ln_pref = prefactor.ln();
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - ln_pref - exponent * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        prefactor,
        exponent,
        residual: (rss / pts.len() as f64).sqrt(),
        t_min,
        t_max: pts.iter().map(|p| p.t).max().unwrap_or(t_min),
        points: pts.len(),
        method,
    })
}

/// Returns `(intercept, slope)`.
fn log_log_ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct times".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// Levenberg-Marquardt on `Σ (c·t^α − m2)²`.
fn direct_least_squares(pts: &[MomentPoint], c0: f64, alpha0: f64) -> Result<(f64, f64)> {
    let cost = |c: f64, a: f64| -> f64 {
        pts.iter()
            .map(|p| (c * (p.t as f64).powf(a) - p.m2).powi(2))
            .sum()
    };
    let (mut c, mut alpha) = (c0, alpha0);
    let mut current = cost(c, alpha);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        // normal equations J^T J δ = −J^T r
        let (mut jcc, mut jca, mut jaa, mut gc, mut ga) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in pts {
            let t = p.t as f64;
            let pow = t.powf(alpha);
            let r = c * pow - p.m2;
            let dc = pow;
            let da = c * pow * t.ln();
            jcc += dc * dc;
            jca += dc * da;
            jaa += da * da;
            gc += dc * r;
            ga += da * r;
        }
        if gc.abs() + ga.abs() <= 1e-14 * (1.0 + current) {
            break;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let a11 = jcc * (1.0 + lambda);
            let a22 = jaa * (1.0 + lambda);
            let det = a11 * a22 - jca * jca;
            if det.abs() < f64::MIN_POSITIVE {
                lambda *= 10.0;
                continue;
            }
            let dc = -(a22 * gc - jca * ga) / det;
            let da = -(a11 * ga - jca * gc) / det;
            let (nc, na) = (c + dc, alpha + da);
            let next = cost(nc, na);
            if nc > 0.0 && next.is_finite() && next <= current {
                let converged = dc.abs() <= 1e-15 * c.abs() && da.abs() <= 1e-15 * alpha.abs().max(1.0);
                c = nc;
                alpha = na;
                current = next;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !converged;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !(c.is_finite() && alpha.is_finite() && c > 0.0) {
        return Err(Error::FitDiverged);
    }
    Ok((c, alpha))
}
