//! Discrete-time quantum walks on a line with ordered and disordered coin
//! tossing.
//!
//! The walker carries a polarization qubit (`|↑⟩`, `|↓⟩`) and a lattice
//! position. Each step applies a 2x2 coin to the qubit and then shifts
//! `|↑⟩` one site right and `|↓⟩` one site left. The main observable is the
//! von Neumann entropy of the reduced coin state, which measures
//! coin-position entanglement.
//!
//! Modules:
//! - [`coin`]: Hadamard, Fourier and wave-plate coins.
//! - [`walk`]: walker state, coin policies, evolution.
//! - [`entanglement`]: reduced density matrices and entropy.
//! - [`transport`]: position distributions, second moments, power-law fits.
//! - [`sequence`], [`lz`], [`sweep`]: coin sequences, Lempel-Ziv complexity,
//!   sequence-space statistics.
//! - [`tomography`]: emulated projective measurements and reconstruction.
//! - [`export`]: CSV/JSON layouts.

pub mod coin;
pub mod entanglement;
pub mod error;
pub mod export;
pub mod lz;
pub mod sequence;
pub mod sweep;
pub mod tomography;
pub mod transport;
pub mod walk;

pub use coin::{fourier_coin, hadamard_coin, hwp_coin, phase_invariant_distance, qwp_coin, Complex2x2, Spinor, C64};
pub use entanglement::{
    asymptotic_entropy, entanglement_entropy, entropy_curve, reduced_coin_density, site_decomposition,
    von_neumann_entropy, DensityMatrix2, EntropyPoint, SiteDecomposition, TailWindow,
};
pub use error::{Error, Result};
pub use lz::{format_parse, lz_complexity};
pub use sequence::{parse_sequence, CoinSequence, Symbol, OPTIMAL_SEQUENCE_51_0};
pub use sweep::{
    best_sequences, entropy_of_sequence, exhaustive_sweep, sampled_sweep, Histogram, SweepOptions, SweepReport,
};
pub use tomography::{fidelity, similarity, tomographic_entropy, CountMode, TomographyResult};
pub use transport::{
    classical_baseline, fit_power_law, moment_series, position_distribution, second_moment, FitMethod,
    MomentSeries, PositionDistribution, PowerLawFit,
};
pub use walk::{evolve, final_state, CoinPolicy, InitialCoin, WalkState};
