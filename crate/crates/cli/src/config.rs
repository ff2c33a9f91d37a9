//! Run configuration shared by the config file, the flags, and the echo
//! written next to every output.
//!
//! The file is flat TOML with a mandatory `schema_version = 1`. Unknown keys
//! are rejected. Flags given on the command line replace file values; the
//! coin policy keys (`coin`, `sequence`, `random`) are replaced as a group so
//! a flag never combines with a conflicting policy from the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    /// Polar angle of the initial coin, degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Relative phase of the initial coin, degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Several initial coins as `"THETA:PHI"` (entropy only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inits: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    /// Ordered walk with this coin: `H`, `F` or `I`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coin: Option<String>,
    /// Explicit H/F sequence, first symbol applied first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    /// Random {F, H} policy: `dynamic`, `static` or `static_dynamic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub static_seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Sampled rather than exhaustive sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_counts: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noiseless: Option<bool>,
    /// Shot-noise seed for tomography counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shot_seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequences_file: Option<PathBuf>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// `csv` or `json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),+ $(,)?) => {
        $(if $src.$field.is_some() {
            $dst.$field = $src.$field.clone();
        })+
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        match cfg.schema_version {
            Some(SCHEMA_VERSION) => Ok(cfg),
            Some(v) => Err(CliError::Config(format!(
                "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
            ))),
            None => Err(CliError::Config("missing schema_version".into())),
        }
    }

    fn has_policy(&self) -> bool {
        self.coin.is_some() || self.sequence.is_some() || self.random.is_some()
    }

    /// Values set in `flags` win; the policy group is replaced wholesale.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        if flags.has_policy() {
            self.coin = None;
            self.sequence = None;
            self.random = None;
        }
        overlay!(
            self, flags, theta, phi, inits, steps, coin, sequence, random, seed, static_seed, n, bins,
            threshold, samples, workers, top, correlation, total_counts, noiseless, shot_seed, t_min, fit_method,
            series, classical, ensemble, tail_end, tail_len, eigenvalues, sequences, sequences_file, out,
            format,
        );
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}
