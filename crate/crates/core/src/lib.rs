//! Detection of minor-probability events with a magnified Bayes rule.
//!
//! The classical Bayes detector compares `w_A·p_A(x)` with `w_B·p_B(x)` and
//! is optimal for overall error, but when `w_B ≪ w_A` it misses most of the
//! rare events. The MIM detector runs both weighted likelihoods through the
//! importance magnifier `p·e^{-s0·p}`, which lifts small values past `1/s0`,
//! trading a bounded rise in false alarms for fewer misses.
//!
//! * [`mim`]: the importance measure, the magnifier and its ratio solver.
//! * [`distributions`]: Gaussian densities, priors, seeded sampling.
//! * [`detectors`]: Bayes and MIM rules, `s0` calibration.
//! * [`error_analysis`]: miss/false-alarm rates, KL divergence, Chernoff exponent.
//! * [`experiments`]: prior-ratio and mean-separation sweeps.

pub mod detectors;
pub mod distributions;
pub mod error;
pub mod error_analysis;
pub mod experiments;
pub mod mim;
pub mod quadrature;

pub use detectors::{calibrate_s0, s0_from_means, Calibration, Decision, DetectorKind, DetectorModel};
pub use distributions::{
    child_seed, sample_mixture, sample_n, Density, Event, GaussianDensity, LabeledSample, PriorPair, Sampler,
};
pub use error::{Error, Result};
pub use error_analysis::{
    chernoff_exponent, error_rates_monte_carlo, error_rates_quadrature, kl_divergence, tilted_distribution,
    ChernoffResult, ConfusionCounts, ErrorRates, TiltedDensity,
};
pub use experiments::{
    linear_grid, run_mean_sweep, run_prior_sweep, run_sweep, RateSource, SweepFailure, SweepKind, SweepOutput,
    SweepRow, SweepSpec,
};
pub use mim::{magnify, mim_discrete, solve_magnifying_ratio, DiscreteDistribution, ImportanceCoeff, MagnifyingRatio};
