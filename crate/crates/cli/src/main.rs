//! `dtqw`: drives the quantum-walk analyses from a TOML config and/or flags.
//!
//! Every run writes its outputs plus `run_config.toml`, the fully resolved
//! configuration, into the output directory. Passing that file back with
//! `--config` reproduces the run byte for byte. Errors are reported as one
//! JSON object on stderr with a nonzero exit code.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Command;
use config::RunConfig;
use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "dtqw", version, about = "Discrete-time quantum walk analyses")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evolve a walk and write the trajectory and final distribution.
    Walk {
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Entanglement entropy curves S_E(t), one file per initial coin.
    Entropy {
        #[command(flatten)]
        init: InitArgs,
        /// Initial coin as THETA:PHI in degrees; repeatable.
        #[arg(long = "init", value_name = "THETA:PHI")]
        inits: Vec<String>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        steps: Option<usize>,
        /// Also report the mean entropy over a tail window ending here.
        #[arg(long)]
        tail_end: Option<usize>,
        #[arg(long)]
        tail_len: Option<usize>,
        /// Add the reduced-state eigenvalues to each row.
        #[arg(long)]
        eigenvalues: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Entropy statistics over all (or sampled) H/F sequences of length n.
    Sweep {
        #[command(flatten)]
        init: InitArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Draw this many random sequences instead of enumerating.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Number of highest-entropy sequences to list.
        #[arg(long)]
        top: Option<usize>,
        /// Spearman correlation between LZ complexity and entropy.
        #[arg(long)]
        correlation: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Lempel-Ziv complexity and parse of coin sequences.
    Lz {
        /// Lines of `SEQUENCE [EXPECTED]`; `#` starts a comment.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Repeatable.
        #[arg(long = "sequence")]
        sequences: Vec<String>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Power-law fit m2 ≈ c·t^α to a walk, an ensemble, a series file or the
    /// classical baseline.
    Fit {
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        steps: Option<usize>,
        /// `t,m2` CSV to fit instead of a walk.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Fit the classical random walk m2 = t.
        #[arg(long)]
        classical: bool,
        /// Average m2 over N dynamically random {F, H} walks.
        #[arg(long, value_name = "N")]
        ensemble: Option<usize>,
        #[arg(long)]
        t_min: Option<u32>,
        /// `direct` or `loglog`.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Emulated sitewise tomography of the final state.
    Tomo {
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        total_counts: Option<u64>,
        #[arg(long)]
        shot_seed: Option<u64>,
        /// Use expected counts instead of shot noise.
        #[arg(long)]
        noiseless: bool,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Debug)]
struct InitArgs {
    /// Initial coin polar angle, degrees in [0, 180].
    #[arg(long)]
    theta: Option<f64>,
    /// Initial coin relative phase, degrees in [0, 360).
    #[arg(long)]
    phi: Option<f64>,
}

#[derive(Args, Debug)]
struct PolicyArgs {
    /// Same coin at every step: H, F or I.
    #[arg(long, value_name = "COIN")]
    ordered: Option<String>,
    /// H/F coin sequence, first symbol applied first.
    #[arg(long)]
    sequence: Option<String>,
    /// Random {F, H} coins: dynamic, static or static_dynamic.
    #[arg(long, value_name = "KIND")]
    random: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    static_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct IoArgs {
    /// TOML run config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

impl InitArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.theta = self.theta;
        cfg.phi = self.phi;
    }
}

impl PolicyArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.coin = self.ordered.clone();
        cfg.sequence = self.sequence.clone();
        cfg.random = self.random.clone();
        cfg.seed = self.seed;
        cfg.static_seed = self.static_seed;
    }
}

impl IoArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.out = self.out.clone();
        cfg.format = self.format.clone();
    }
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

fn non_empty(v: &[String]) -> Option<Vec<String>> {
    (!v.is_empty()).then(|| v.to_vec())
}

/// The command, the flag values as a partial config, and the I/O options.
fn flags_of(cmd: &Cmd) -> (Command, RunConfig, &IoArgs) {
    let mut cfg = RunConfig::default();
    let (command, io) = match cmd {
        Cmd::Walk { init, policy, steps, io } => {
            init.apply(&mut cfg);
            policy.apply(&mut cfg);
            cfg.steps = *steps;
            (Command::Walk, io)
        }
        Cmd::Entropy {
            init,
            inits,
            policy,
            steps,
            tail_end,
            tail_len,
            eigenvalues,
            io,
        } => {
            init.apply(&mut cfg);
            policy.apply(&mut cfg);
            cfg.inits = non_empty(inits);
            cfg.steps = *steps;
            cfg.tail_end = *tail_end;
            cfg.tail_len = *tail_len;
            cfg.eigenvalues = flag(*eigenvalues);
            (Command::Entropy, io)
        }
        Cmd::Sweep {
            init,
            n,
            bins,
            threshold,
            samples,
            seed,
            workers,
            top,
            correlation,
            io,
        } => {
            init.apply(&mut cfg);
            cfg.n = *n;
            cfg.bins = *bins;
            cfg.threshold = *threshold;
            cfg.samples = *samples;
            cfg.seed = *seed;
            cfg.workers = *workers;
            cfg.top = *top;
            cfg.correlation = flag(*correlation);
            (Command::Sweep, io)
        }
        Cmd::Lz { file, sequences, io } => {
            cfg.sequences_file = file.clone();
            cfg.sequences = non_empty(sequences);
            (Command::Lz, io)
        }
        Cmd::Fit {
            init,
            policy,
            steps,
            series,
            classical,
            ensemble,
            t_min,
            method,
            io,
        } => {
            init.apply(&mut cfg);
            policy.apply(&mut cfg);
            cfg.steps = *steps;
            cfg.series = series.clone();
            cfg.classical = flag(*classical);
            cfg.ensemble = *ensemble;
            cfg.t_min = *t_min;
            cfg.fit_method = method.clone();
            (Command::Fit, io)
        }
        Cmd::Tomo {
            init,
            policy,
            steps,
            total_counts,
            shot_seed,
            noiseless,
            io,
        } => {
            init.apply(&mut cfg);
            policy.apply(&mut cfg);
            cfg.steps = *steps;
            cfg.total_counts = *total_counts;
            cfg.shot_seed = *shot_seed;
            cfg.noiseless = flag(*noiseless);
            (Command::Tomo, io)
        }
    };
    io.apply(&mut cfg);
    (command, cfg, io)
}

fn execute(cli: Cli) -> Result<()> {
    let (command, flags, io) = flags_of(&cli.command);
    let file = io.config.as_deref().map(RunConfig::load).transpose()?;
    let cfg = commands::resolve(command, file, &flags)?;
    let run = commands::run(command, &cfg)?;
    let out = cfg.out.clone().expect("resolved output directory");
    let written = run.outputs.write(&out, io.force)?;
    // A closed stdout (e.g. piped into `head`) is not an error.
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", run.summary);
    for path in written {
        if writeln!(stdout, "wrote {}", path.display()).is_err() {
            break;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
