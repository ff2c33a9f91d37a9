//! One function per subcommand. Each takes the fully resolved configuration
//! and returns the files to write plus a short summary for stdout.

use dtqw_core::coin::{fourier_coin, hadamard_coin, Complex2x2};
use dtqw_core::entanglement::{asymptotic_entropy, entanglement_entropy, entropy_curve, TailWindow};
use dtqw_core::export::{
    fmt_sig, read_moments_csv, trajectory_records, write_counts_csv, write_distribution_csv, write_entropy_csv,
    write_moments_csv, write_trajectory_csv,
};
use dtqw_core::lz::{format_parse, lz_complexity};
use dtqw_core::sequence::CoinSequence;
use dtqw_core::sweep::{
    best_sequences, complexity_entropy_correlation, exhaustive_sweep, sampled_sweep, Histogram, SweepOptions,
};
use dtqw_core::tomography::{estimate_from_counts, simulate_counts, CountMode};
use dtqw_core::transport::{
    classical_baseline, ensemble_moment_series, fit_power_law, moment_series, position_distribution, second_moment,
    FitMethod, MomentSeries,
};
use dtqw_core::walk::{evolve, CoinPolicy, InitialCoin};
use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::{CliError, Result};
use crate::output::{Format, Outputs};

pub const DEFAULT_OUT: &str = "dtqw-out";

/// Subcommands, by config name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Walk,
    Entropy,
    Sweep,
    Lz,
    Fit,
    Tomo,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Walk => "walk",
            Command::Entropy => "entropy",
            Command::Sweep => "sweep",
            Command::Lz => "lz",
            Command::Fit => "fit",
            Command::Tomo => "tomo",
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Merges file and flags, checks the command, and fills every default so
/// the echoed config is complete.
pub fn resolve(command: Command, file: Option<RunConfig>, flags: &RunConfig) -> Result<RunConfig> {
    let mut cfg = match file {
        Some(file) => {
            if let Some(c) = &file.command {
                if c != command.name() {
                    return Err(config_error(format!(
                        "config is for command {c:?}, not {:?}",
                        command.name()
                    )));
                }
            }
            file.overlay(flags)
        }
        None => flags.clone(),
    };
    cfg.schema_version = Some(SCHEMA_VERSION);
    cfg.command = Some(command.name().into());
    cfg.format.get_or_insert_with(|| "csv".into());
    cfg.out.get_or_insert_with(|| DEFAULT_OUT.into());
    Format::parse(cfg.format.as_deref().unwrap_or("csv"))?;

    let from_series = command == Command::Fit && (cfg.series.is_some() || cfg.classical == Some(true));
    let needs_init = match command {
        Command::Walk | Command::Tomo | Command::Sweep => true,
        Command::Entropy => cfg.inits.is_none(),
        Command::Fit => !from_series,
        Command::Lz => false,
    };
    if needs_init {
        cfg.theta.get_or_insert(51.0);
        cfg.phi.get_or_insert(0.0);
    }
    let needs_policy = match command {
        Command::Walk | Command::Tomo | Command::Entropy => true,
        Command::Fit => !from_series && cfg.ensemble.is_none(),
        Command::Sweep | Command::Lz => false,
    };
    if needs_policy {
        if cfg.coin.is_none() && cfg.sequence.is_none() && cfg.random.is_none() {
            cfg.coin = Some("H".into());
        }
        if let (Some(seq), None) = (&cfg.sequence, cfg.steps) {
            cfg.steps = Some(seq.trim().chars().count());
        }
        if let Some(kind) = &cfg.random {
            cfg.seed.get_or_insert(0);
            if kind == "static_dynamic" {
                cfg.static_seed.get_or_insert(1);
            }
        }
    }
    match command {
        Command::Walk | Command::Tomo | Command::Entropy => {}
        Command::Sweep => {
            cfg.n.get_or_insert(20);
            cfg.bins.get_or_insert(12);
            cfg.threshold.get_or_insert(0.9);
            cfg.top.get_or_insert(10);
            cfg.correlation.get_or_insert(false);
            if cfg.samples.is_some() {
                cfg.seed.get_or_insert(0);
            }
        }
        Command::Lz => {}
        Command::Fit => {
            cfg.t_min.get_or_insert(1);
            cfg.fit_method.get_or_insert_with(|| "direct".into());
            if cfg.series.is_none() {
                cfg.steps.get_or_insert(20);
            }
            if cfg.ensemble.is_some() {
                cfg.seed.get_or_insert(0);
            }
        }
    }
    if command == Command::Tomo {
        cfg.total_counts.get_or_insert(24_000);
        cfg.noiseless.get_or_insert(false);
        if cfg.noiseless == Some(false) {
            cfg.shot_seed.get_or_insert(0);
        }
    }
    if command == Command::Entropy {
        cfg.eigenvalues.get_or_insert(false);
        if cfg.tail_end.is_some() || cfg.tail_len.is_some() {
            let default = TailWindow::default();
            cfg.tail_end.get_or_insert(default.end);
            cfg.tail_len.get_or_insert(default.len);
        }
    }
    Ok(cfg)
}

pub struct Run {
    pub outputs: Outputs,
    pub summary: String,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Run> {
    let format = Format::parse(cfg.format.as_deref().unwrap_or("csv"))?;
    let mut run = match command {
        Command::Walk => walk(cfg, format)?,
        Command::Entropy => entropy(cfg, format)?,
        Command::Sweep => sweep(cfg, format)?,
        Command::Lz => lz(cfg, format)?,
        Command::Fit => fit(cfg, format)?,
        Command::Tomo => tomo(cfg, format)?,
    };
    run.outputs.add("run_config.toml", cfg.to_toml());
    Ok(run)
}

fn init_of(cfg: &RunConfig) -> Result<InitialCoin> {
    let theta = cfg.theta.ok_or_else(|| config_error("theta is required"))?;
    let phi = cfg.phi.ok_or_else(|| config_error("phi is required"))?;
    Ok(InitialCoin::new(theta, phi)?)
}

fn parse_init(text: &str) -> Result<InitialCoin> {
    let (t, p) = text
        .split_once(':')
        .ok_or_else(|| config_error(format!("init {text:?} is not THETA:PHI")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| config_error(format!("init {text:?}: {e}")))
    };
    Ok(InitialCoin::new(parse(t)?, parse(p)?)?)
}

fn steps_of(cfg: &RunConfig) -> Result<usize> {
    match cfg.steps {
        Some(0) => Err(config_error("steps must be at least 1")),
        Some(n) => Ok(n),
        None => Err(config_error("steps is required")),
    }
}

fn coin_by_name(name: &str) -> Result<Complex2x2> {
    match name.trim().to_ascii_uppercase().as_str() {
        "H" => Ok(hadamard_coin()),
        "F" => Ok(fourier_coin()),
        "I" => Ok(Complex2x2::identity()),
        other => Err(config_error(format!("unknown coin {other:?} (expected H, F or I)"))),
    }
}

fn policy_of(cfg: &RunConfig) -> Result<CoinPolicy> {
    let given = [cfg.coin.is_some(), cfg.sequence.is_some(), cfg.random.is_some()];
    if given.iter().filter(|&&g| g).count() > 1 {
        return Err(config_error("give only one of coin, sequence, random"));
    }
    if let Some(name) = &cfg.coin {
        return Ok(CoinPolicy::Ordered(coin_by_name(name)?));
    }
    if let Some(text) = &cfg.sequence {
        return Ok(CoinPolicy::DynamicSequence(text.trim().parse()?));
    }
    let alphabet = CoinPolicy::hf_alphabet();
    let seed = cfg.seed.unwrap_or(0);
    match cfg.random.as_deref() {
        Some("dynamic") => Ok(CoinPolicy::DynamicRandom { alphabet, seed }),
        Some("static") => Ok(CoinPolicy::StaticRandom { alphabet, seed }),
        Some("static_dynamic") => Ok(CoinPolicy::StaticAndDynamic {
            alphabet,
            static_seed: cfg.static_seed.unwrap_or(1),
            dynamic_seed: seed,
        }),
        Some(other) => Err(config_error(format!(
            "unknown random policy {other:?} (expected dynamic, static or static_dynamic)"
        ))),
        None => Ok(CoinPolicy::hadamard()),
    }
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn add_table<T: Serialize>(
    outputs: &mut Outputs,
    stem: &str,
    format: Format,
    rows: &T,
    write_csv: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) {
    let name = format!("{stem}.{}", format.extension());
    match format {
        Format::Csv => outputs.add(name, csv(write_csv)),
        Format::Json => outputs.add_json(name, rows),
    }
}

fn walk(cfg: &RunConfig, format: Format) -> Result<Run> {
    let init = init_of(cfg)?;
    let steps = steps_of(cfg)?;
    let trajectory = evolve(&init, &policy_of(cfg)?, steps)?;
    let last = trajectory.last().expect("at least the initial state");
    let dist = position_distribution(last);
    let entropy = entanglement_entropy(last)?;
    let m2 = second_moment(&dist);

    let mut outputs = Outputs::default();
    add_table(&mut outputs, "trajectory", format, &trajectory_records(&trajectory), |b| {
        write_trajectory_csv(b, &trajectory)
    });
    add_table(&mut outputs, "distribution", format, &distribution_rows(&dist), |b| {
        write_distribution_csv(b, &dist)
    });
    Ok(Run {
        outputs,
        summary: format!(
            "t={steps} total_probability={} entropy={} m2={}",
            fmt_sig(dist.total()),
            fmt_sig(entropy),
            fmt_sig(m2)
        ),
    })
}

#[derive(Serialize)]
struct DistributionRow {
    j: i64,
    probability: f64,
}

fn distribution_rows(dist: &dtqw_core::transport::PositionDistribution) -> Vec<DistributionRow> {
    dist.points()
        .iter()
        .map(|&(j, probability)| DistributionRow { j, probability })
        .collect()
}

#[derive(Serialize)]
struct EntropySummaryRow {
    theta: f64,
    phi: f64,
    final_entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_average: Option<f64>,
}

fn angle_tag(x: f64) -> String {
    fmt_sig(x).replace('-', "m")
}

fn entropy(cfg: &RunConfig, format: Format) -> Result<Run> {
    let steps = steps_of(cfg)?;
    let policy = policy_of(cfg)?;
    let inits = match &cfg.inits {
        Some(list) if !list.is_empty() => list.iter().map(|s| parse_init(s)).collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(config_error("inits is empty")),
        None => vec![init_of(cfg)?],
    };
    let window = match (cfg.tail_end, cfg.tail_len) {
        (Some(end), Some(len)) => Some(TailWindow { end, len }),
        _ => None,
    };
    let eigen = cfg.eigenvalues.unwrap_or(false);

    let mut outputs = Outputs::default();
    let mut rows = Vec::new();
    for init in &inits {
        let curve = entropy_curve(init, &policy, steps)?;
        let stem = format!(
            "entropy_theta{}_phi{}",
            angle_tag(init.theta_deg()),
            angle_tag(init.phi_deg())
        );
        add_table(&mut outputs, &stem, format, &curve, |b| write_entropy_csv(b, &curve, eigen));
        let tail_average = match window {
            Some(w) => Some(asymptotic_entropy(init, &policy, w)?),
            None => None,
        };
        rows.push(EntropySummaryRow {
            theta: init.theta_deg(),
            phi: init.phi_deg(),
            final_entropy: curve.last().expect("non-empty curve").entropy,
            tail_average,
        });
    }
    let summary = rows
        .iter()
        .map(|r| {
            let tail = r.tail_average.map(|x| format!(" tail_average={}", fmt_sig(x))).unwrap_or_default();
            format!("theta={} phi={} S_E({steps})={}{tail}", r.theta, r.phi, fmt_sig(r.final_entropy))
        })
        .collect::<Vec<_>>()
        .join("\n");
    add_table(&mut outputs, "entropy_summary", format, &rows, |b| {
        use std::io::Write;
        let with_tail = window.is_some();
        writeln!(b, "theta,phi,final_entropy{}", if with_tail { ",tail_average" } else { "" })?;
        for r in &rows {
            write!(b, "{},{},{}", fmt_sig(r.theta), fmt_sig(r.phi), fmt_sig(r.final_entropy))?;
            if let Some(x) = r.tail_average {
                write!(b, ",{}", fmt_sig(x))?;
            }
            writeln!(b)?;
        }
        Ok(())
    });
    Ok(Run { outputs, summary })
}

#[derive(Serialize)]
struct HistogramRow {
    lower: f64,
    upper: f64,
    count: u64,
    rate: f64,
}

#[derive(Serialize)]
struct RankedSequence {
    rank: usize,
    sequence: String,
    entropy: f64,
    lz_complexity: usize,
}

fn sweep(cfg: &RunConfig, format: Format) -> Result<Run> {
    let init = init_of(cfg)?;
    let n = cfg.n.expect("defaulted");
    let options = SweepOptions {
        histogram: Histogram::uniform_unit(cfg.bins.expect("defaulted"))?,
        threshold: cfg.threshold.expect("defaulted"),
        workers: cfg.workers,
        keep_entropies: true,
    };
    let report = match cfg.samples {
        Some(samples) => sampled_sweep(&init, n, samples, cfg.seed.unwrap_or(0), &options)?,
        None => exhaustive_sweep(&init, n, &options)?,
    };
    let top = cfg.top.expect("defaulted").min(report.count as usize);
    let ranked: Vec<RankedSequence> = best_sequences(&report, top)?
        .into_iter()
        .enumerate()
        .map(|(k, seq)| {
            let code = seq.code().expect("sweep sequences are packable");
            RankedSequence {
                rank: k + 1,
                entropy: report.entropy_of_code(code).expect("entropy retained"),
                lz_complexity: lz_complexity(&seq),
                sequence: seq.to_string(),
            }
        })
        .collect();
    let correlation = if cfg.correlation == Some(true) {
        Some(complexity_entropy_correlation(&report)?)
    } else {
        None
    };

    // wall time is left out of the files so reruns are byte-identical
    let mut value = serde_json::to_value(&report).expect("report serializes");
    let obj = value.as_object_mut().expect("report is an object");
    obj.remove("wall_time_s");
    if let Some(rho) = correlation {
        obj.insert("lz_entropy_spearman".into(), serde_json::json!(rho));
    }

    let hist = &report.histogram;
    let hist_rows: Vec<HistogramRow> = hist
        .counts
        .iter()
        .zip(hist.rates())
        .enumerate()
        .map(|(k, (&count, rate))| HistogramRow {
            lower: hist.edges[k],
            upper: hist.edges[k + 1],
            count,
            rate,
        })
        .collect();

    let mut outputs = Outputs::default();
    outputs.add_json("sweep_report.json", &value);
    add_table(&mut outputs, "histogram", format, &hist_rows, |b| {
        use std::io::Write;
        writeln!(b, "lower,upper,count,rate")?;
        for r in &hist_rows {
            writeln!(b, "{},{},{},{}", fmt_sig(r.lower), fmt_sig(r.upper), r.count, fmt_sig(r.rate))?;
        }
        Ok(())
    });
    add_table(&mut outputs, "top_sequences", format, &ranked, |b| {
        use std::io::Write;
        writeln!(b, "rank,sequence,entropy,lz_complexity")?;
        for r in &ranked {
            writeln!(b, "{},{},{},{}", r.rank, r.sequence, fmt_sig(r.entropy), r.lz_complexity)?;
        }
        Ok(())
    });
    let mut summary = format!(
        "n={n} count={} mean={} std={} fraction_above({})={} max={} min={} wall={:.2}s",
        report.count,
        fmt_sig(report.mean_entropy),
        fmt_sig(report.std_entropy),
        fmt_sig(report.threshold),
        fmt_sig(report.fraction_above),
        fmt_sig(report.max_entropy),
        fmt_sig(report.min_entropy),
        report.wall_time_s
    );
    if let Some(rho) = correlation {
        summary.push_str(&format!(" spearman(lz, entropy)={}", fmt_sig(rho)));
    }
    Ok(Run { outputs, summary })
}

#[derive(Serialize)]
struct LzRow {
    sequence: String,
    complexity: usize,
    parse: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<usize>,
}

/// `SEQUENCE [EXPECTED]` per line; `#` starts a comment.
fn read_sequence_lines(text: &str) -> Result<Vec<(CoinSequence, Option<usize>)>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let seq: CoinSequence = fields
            .next()
            .expect("non-empty line")
            .parse()
            .map_err(|e| config_error(format!("line {}: {e}", k + 1)))?;
        let expected = match fields.next() {
            Some(c) => Some(
                c.parse()
                    .map_err(|e| config_error(format!("line {}: expected complexity: {e}", k + 1)))?,
            ),
            None => None,
        };
        rows.push((seq, expected));
    }
    Ok(rows)
}

fn lz(cfg: &RunConfig, format: Format) -> Result<Run> {
    let mut input = Vec::new();
    if let Some(path) = &cfg.sequences_file {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        input.extend(read_sequence_lines(&text)?);
    }
    for s in cfg.sequences.iter().flatten() {
        input.push((s.trim().parse()?, None));
    }
    if input.is_empty() {
        return Err(config_error("no sequences given (use --sequence or --file)"));
    }
    let rows: Vec<LzRow> = input
        .into_iter()
        .map(|(seq, expected)| LzRow {
            complexity: lz_complexity(&seq),
            parse: format_parse(&seq),
            sequence: seq.to_string(),
            expected,
        })
        .collect();
    let mut outputs = Outputs::default();
    add_table(&mut outputs, "lz", format, &rows, |b| {
        use std::io::Write;
        writeln!(b, "sequence,complexity,parse,expected")?;
        for r in &rows {
            let expected = r.expected.map(|c| c.to_string()).unwrap_or_default();
            writeln!(b, "{},{},{},{expected}", r.sequence, r.complexity, r.parse)?;
        }
        Ok(())
    });
    let complexities: Vec<String> = rows.iter().map(|r| r.complexity.to_string()).collect();
    let mismatches: Vec<&str> = rows
        .iter()
        .filter(|r| r.expected.is_some_and(|c| c != r.complexity))
        .map(|r| r.sequence.as_str())
        .collect();
    let mut summary = format!("complexities ({})", complexities.join(","));
    if !mismatches.is_empty() {
        summary.push_str(&format!("\ndiffers from listed value: {}", mismatches.join(", ")));
    }
    Ok(Run { outputs, summary })
}

fn fit_method(cfg: &RunConfig) -> Result<FitMethod> {
    match cfg.fit_method.as_deref().unwrap_or("direct") {
        "direct" => Ok(FitMethod::Direct),
        "loglog" => Ok(FitMethod::LogLog),
        other => Err(config_error(format!("fit_method must be direct or loglog, got {other:?}"))),
    }
}

fn fit(cfg: &RunConfig, format: Format) -> Result<Run> {
    let sources = [
        cfg.series.is_some(),
        cfg.classical == Some(true),
        cfg.ensemble.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() > 1 {
        return Err(config_error("give only one of series, classical, ensemble"));
    }
    let (series, source): (MomentSeries, String) = if let Some(path) = &cfg.series {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let series = read_moments_csv(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        (series, format!("series {}", path.display()))
    } else if cfg.classical == Some(true) {
        let steps = steps_of(cfg)?;
        (classical_baseline(steps as u32), "classical".into())
    } else if let Some(realizations) = cfg.ensemble {
        let init = init_of(cfg)?;
        let steps = steps_of(cfg)?;
        let seed = cfg.seed.unwrap_or(0);
        let series = ensemble_moment_series(&init, CoinPolicy::hf_alphabet(), steps, realizations, seed)?;
        (series, format!("ensemble of {realizations} dynamic random walks"))
    } else {
        let init = init_of(cfg)?;
        let steps = steps_of(cfg)?;
        (moment_series(&init, &policy_of(cfg)?, steps)?, "walk".into())
    };
    let fit = fit_power_law(&series, cfg.t_min.unwrap_or(1), fit_method(cfg)?)?;

    #[derive(Serialize)]
    struct FitOutput<'a> {
        source: &'a str,
        #[serde(flatten)]
        fit: &'a dtqw_core::transport::PowerLawFit,
    }
    let mut outputs = Outputs::default();
    outputs.add_json("fit.json", &FitOutput { source: &source, fit: &fit });
    add_table(&mut outputs, "moments", format, &series.points, |b| write_moments_csv(b, &series));
    Ok(Run {
        outputs,
        summary: format!(
            "{source}: m2 ≈ {} · t^{} over t∈[{}, {}] ({} points, log residual {})",
            fmt_sig(fit.prefactor),
            fmt_sig(fit.exponent),
            fit.t_min,
            fit.t_max,
            fit.points,
            fmt_sig(fit.residual)
        ),
    })
}

#[derive(Serialize)]
struct SiteRow {
    j: i64,
    probability: f64,
    true_probability: f64,
    fidelity: Option<f64>,
}

fn tomo(cfg: &RunConfig, format: Format) -> Result<Run> {
    let init = init_of(cfg)?;
    let steps = steps_of(cfg)?;
    let state = evolve(&init, &policy_of(cfg)?, steps)?.pop().expect("non-empty trajectory");
    let mode = if cfg.noiseless == Some(true) {
        CountMode::Expected
    } else {
        CountMode::Shots {
            seed: cfg.shot_seed.unwrap_or(0),
        }
    };
    let total = cfg.total_counts.unwrap_or(24_000);
    let counts = simulate_counts(&state, total, mode)?;
    let result = estimate_from_counts(&state, &counts)?;
    let sites: Vec<SiteRow> = result
        .sites
        .iter()
        .map(|s| SiteRow {
            j: s.site,
            probability: s.probability,
            true_probability: s.true_probability,
            fidelity: s.fidelity,
        })
        .collect();
    let mut outputs = Outputs::default();
    add_table(&mut outputs, "counts", format, &counts, |b| write_counts_csv(b, &counts));
    add_table(&mut outputs, "sites", format, &sites, |b| {
        use std::io::Write;
        writeln!(b, "j,probability,true_probability,fidelity")?;
        for s in &sites {
            let fid = s.fidelity.map(fmt_sig).unwrap_or_default();
            writeln!(b, "{},{},{},{fid}", s.j, fmt_sig(s.probability), fmt_sig(s.true_probability))?;
        }
        Ok(())
    });
    outputs.add_json("tomography.json", &result);
    let summary = format!(
        "entropy={} exact_entropy={} rho_c_fidelity={} similarity={} min_site_fidelity={}",
        fmt_sig(result.entropy),
        fmt_sig(result.exact_entropy),
        fmt_sig(result.rho_c_fidelity),
        fmt_sig(result.similarity),
        fmt_sig(result.min_site_fidelity)
    );
    Ok(Run { outputs, summary })
}
