use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not unitary (max |U U^dag - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("{name} = {value} is outside its valid range {range}")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("state is not normalized (norm = {norm})")]
    Unnormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("step count must be at least 1")]
    NoSteps,

    #[error("coin sequence has length {actual} but {expected} steps were requested")]
    SequenceLength { expected: usize, actual: usize },

    #[error("empty coin sequence")]
    EmptySequence,

    #[error("illegal symbol {found:?} at index {index} (expected H or F)")]
    IllegalSymbol { index: usize, found: char },

    #[error("sequence length {n} exceeds the supported maximum of {max}")]
    SequenceTooLong { n: usize, max: usize },

    #[error("need at least {needed} points with t >= {t_min}, found {found}")]
    TooFewPoints {
        needed: usize,
        found: usize,
        t_min: u32,
    },

    #[error("second moment is not positive at t = {t}")]
    NonPositiveMoment { t: u32 },

    #[error("fit did not converge")]
    FitDiverged,

    #[error("exhaustive sweep over 2^{n} sequences refused (max n = {max}); use a sampled sweep")]
    SweepTooLarge { n: usize, max: usize },

    #[error("invalid histogram bins: {0}")]
    InvalidBins(String),

    #[error("requested {k} sequences but the report holds {count}")]
    TooManyRequested { k: usize, count: usize },

    #[error("report does not retain per-sequence entropies")]
    NoEntropies,

    #[error("site {site} carries no probability")]
    EmptySite { site: i64 },

    #[error("site {site}: basis pair {pair} has zero total counts")]
    ZeroCounts { site: i64, pair: &'static str },

    #[error("total count budget must be at least 1")]
    NoCounts,

    #[error("probability distribution is not normalized (sum = {sum})")]
    UnnormalizedDistribution { sum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
