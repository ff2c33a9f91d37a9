//! CSV and JSON record layouts shared by the CLI.
//!
//! Floats are written with 12 significant digits in both formats.

use std::io::{self, Write};

use serde::Serialize;

use crate::entanglement::EntropyPoint;
use crate::tomography::{Outcome, ProjectionCounts};
use crate::transport::{MomentSeries, PositionDistribution};
use crate::walk::WalkState;

pub const TRAJECTORY_HEADER: &str = "t,j,re_a,im_a,re_b,im_b,probability";
pub const ENTROPY_HEADER: &str = "t,entropy";
pub const ENTROPY_EIGEN_HEADER: &str = "t,entropy,lambda_minus,lambda_plus";
pub const MOMENT_HEADER: &str = "t,m2";
pub const DISTRIBUTION_HEADER: &str = "j,probability";
pub const COUNTS_HEADER: &str = "j,basis,outcome,count";

/// `%.12g`-style formatting.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits, for JSON mirrors.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub j: i64,
    pub re_a: f64,
    pub im_a: f64,
    pub re_b: f64,
    pub im_b: f64,
    pub probability: f64,
}

/// One record per `(t, j)`, ascending `j`, zero-probability sites included.
pub fn trajectory_records(trajectory: &[WalkState]) -> Vec<TrajectoryRecord> {
    trajectory
        .iter()
        .flat_map(|state| {
            state.sites().map(move |(j, s)| TrajectoryRecord {
                t: state.t(),
                j,
                re_a: round_sig(s[0].re),
                im_a: round_sig(s[0].im),
                re_b: round_sig(s[1].re),
                im_b: round_sig(s[1].im),
                probability: round_sig(s[0].norm_sqr() + s[1].norm_sqr()),
            })
        })
        .collect()
}

pub fn write_trajectory_csv(mut out: impl Write, trajectory: &[WalkState]) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for state in trajectory {
        for (j, s) in state.sites() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                state.t(),
                j,
                fmt_sig(s[0].re),
                fmt_sig(s[0].im),
                fmt_sig(s[1].re),
                fmt_sig(s[1].im),
                fmt_sig(s[0].norm_sqr() + s[1].norm_sqr())
            )?;
        }
    }
    Ok(())
}

pub fn write_entropy_csv(mut out: impl Write, curve: &[EntropyPoint], eigenvalues: bool) -> io::Result<()> {
    if eigenvalues {
        writeln!(out, "{ENTROPY_EIGEN_HEADER}")?;
    } else {
        writeln!(out, "{ENTROPY_HEADER}")?;
    }
    for p in curve {
        if eigenvalues {
            writeln!(
                out,
                "{},{},{},{}",
                p.t,
                fmt_sig(p.entropy),
                fmt_sig(p.eigenvalues[0]),
                fmt_sig(p.eigenvalues[1])
            )?;
        } else {
            writeln!(out, "{},{}", p.t, fmt_sig(p.entropy))?;
        }
    }
    Ok(())
}

pub fn write_moments_csv(mut out: impl Write, series: &MomentSeries) -> io::Result<()> {
    writeln!(out, "{MOMENT_HEADER}")?;
    for p in &series.points {
        writeln!(out, "{},{}", p.t, fmt_sig(p.m2))?;
    }
    Ok(())
}

/// Parses `t,m2` rows (header required).
pub fn read_moments_csv(text: &str) -> Result<MomentSeries, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == MOMENT_HEADER => {}
        other => return Err(format!("expected header {MOMENT_HEADER:?}, found {other:?}")),
    }
    let mut pairs = Vec::new();
    for (k, line) in lines.enumerate() {
        let (t, m2) = line
            .split_once(',')
            .ok_or_else(|| format!("row {}: expected two columns", k + 1))?;
        let t: u32 = t.trim().parse().map_err(|e| format!("row {}: {e}", k + 1))?;
        let m2: f64 = m2.trim().parse().map_err(|e| format!("row {}: {e}", k + 1))?;
        pairs.push((t, m2));
    }
    Ok(MomentSeries::from_pairs(pairs))
}

pub fn write_distribution_csv(mut out: impl Write, dist: &PositionDistribution) -> io::Result<()> {
    writeln!(out, "{DISTRIBUTION_HEADER}")?;
    for &(j, p) in dist.points() {
        writeln!(out, "{j},{}", fmt_sig(p))?;
    }
    Ok(())
}

pub fn write_counts_csv(mut out: impl Write, counts: &ProjectionCounts) -> io::Result<()> {
    writeln!(out, "{COUNTS_HEADER}")?;
    for s in &counts.sites {
        for (k, outcome) in Outcome::ALL.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                s.site,
                outcome.basis(),
                outcome,
                fmt_sig(s.counts[k])
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::hadamard_coin;
    use crate::walk::{InitialCoin, WalkState};

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(std::f64::consts::FRAC_1_SQRT_2), "0.707106781187");
        assert_eq!(fmt_sig(-123.456), "-123.456");
        assert_eq!(fmt_sig(1.5e-20), "1.5e-20");
        assert_eq!(fmt_sig(2.0e15), "2e+15");
        assert_eq!(fmt_sig(117.595428466797), "117.595428467");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn trajectory_csv_layout() {
        let s0 = WalkState::initial(&InitialCoin::new(0.0, 0.0).unwrap());
        let s1 = s0.step(&hadamard_coin()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[s0, s1.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines[1], "0,0,1,0,0,0,1");
        assert_eq!(lines[2], "1,-1,0,0,0.707106781187,0,0.5");
        assert_eq!(lines[3], "1,0,0,0,0,0,0");
        assert_eq!(lines.len(), 5);
        assert_eq!(trajectory_records(&[s1]).len(), 3);
    }

    #[test]
    fn moments_round_trip_through_csv() {
        let series = crate::transport::classical_baseline(5);
        let mut buf = Vec::new();
        write_moments_csv(&mut buf, &series).unwrap();
        let back = read_moments_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, series);
        assert!(read_moments_csv("t,x\n1,2").is_err());
    }
}
