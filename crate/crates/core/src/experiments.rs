//! Parameter sweeps comparing the Bayes and MIM detectors.
//!
//! Each grid point recalibrates `s0` on a fresh normal-event training set
//! (unless frozen), then evaluates both detectors by quadrature and by Monte
//! Carlo. Grid points run in parallel; each draws from its own stream
//! seeded by `child_seed(seed, index)`, so output depends only on the spec.

use std::fmt;

use rayon::prelude::*;

use crate::detectors::{calibrate_s0, DetectorKind, DetectorModel};
use crate::distributions::{child_seed, sample_mixture, sample_n, GaussianDensity, PriorPair};
use crate::error::{Error, Result};
use crate::error_analysis::{error_rates_monte_carlo, error_rates_quadrature, ErrorRates};
use crate::mim::ImportanceCoeff;

pub const DEFAULT_N_SAMPLES: usize = 1_000_000;
pub const DEFAULT_CALIBRATION_SIZE: usize = 10_000;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 1;

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    /// `log10(w_A / w_B)` with both densities fixed.
    PriorRatio,
    /// Mean of `p_B` with priors and `p_A` fixed.
    MeanSeparation,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::PriorRatio => "prior_ratio",
            SweepKind::MeanSeparation => "mean_separation",
        }
    }
}

/// How a row's rates were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateSource {
    MonteCarlo,
    Quadrature,
}

impl RateSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RateSource::MonteCarlo => "monte_carlo",
            RateSource::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for RateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RateSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" => Ok(RateSource::MonteCarlo),
            "quadrature" => Ok(RateSource::Quadrature),
            other => Err(Error::invalid("rate source", format!("unknown source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub calibration_size: usize,
    pub density_a: GaussianDensity,
    /// For mean sweeps only the standard deviation is used.
    pub density_b: GaussianDensity,
    /// Used by mean sweeps; prior sweeps derive priors from the grid.
    pub priors: PriorPair,
    /// Skip calibration and use this coefficient at every grid point.
    pub frozen_s0: Option<ImportanceCoeff>,
    pub tol: f64,
}

impl SweepSpec {
    /// `r ∈ {1.0, 1.5, …, 4.0}` with `p_A = N(0, 0.126²)`, `p_B = N(0.5, 0.1²)`.
    pub fn prior_ratio_default() -> Self {
        Self {
            kind: SweepKind::PriorRatio,
            grid: linear_grid(1.0, 4.0, 0.5).expect("static grid"),
            n_samples: DEFAULT_N_SAMPLES,
            seed: DEFAULT_SEED,
            calibration_size: DEFAULT_CALIBRATION_SIZE,
            density_a: GaussianDensity::new(0.0, 0.126).expect("static density"),
            density_b: GaussianDensity::new(0.5, 0.1).expect("static density"),
            priors: PriorPair::from_log10_ratio(3.0).expect("static priors"),
            frozen_s0: None,
            tol: DEFAULT_QUADRATURE_TOL,
        }
    }

    /// `μ_B ∈ {0.2, 0.25, …, 0.8}` with `w_A = 0.992`, `p_A = N(0, 0.126²)`, `σ_B = 0.1`.
    pub fn mean_separation_default() -> Self {
        Self {
            kind: SweepKind::MeanSeparation,
            grid: linear_grid(0.2, 0.8, 0.05).expect("static grid"),
            priors: PriorPair::new(0.992, 0.008).expect("static priors"),
            ..Self::prior_ratio_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("sweep grid", "empty"));
        }
        if let Some(v) = self.grid.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep grid", format!("non-finite value {v}")));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep grid", "values must be strictly increasing"));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("sample count", "must be at least 1"));
        }
        if self.calibration_size == 0 {
            return Err(Error::invalid("calibration size", "must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid(
                "tolerance",
                format!("must be finite and > 0, got {}", self.tol),
            ));
        }
        Ok(())
    }

    /// Priors and densities at one grid value.
    pub fn model_at(&self, value: f64) -> Result<(PriorPair, GaussianDensity, GaussianDensity)> {
        match self.kind {
            SweepKind::PriorRatio => Ok((PriorPair::from_log10_ratio(value)?, self.density_a, self.density_b)),
            SweepKind::MeanSeparation => Ok((self.priors, self.density_a, self.density_b.with_mean(value)?)),
        }
    }
}

/// Both detectors' rates at one grid value from one source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub source: RateSource,
    pub s0: f64,
    pub rates_bayes: ErrorRates,
    pub rates_mim: ErrorRates,
}

impl SweepRow {
    /// `alpha_mim ≤ alpha_bayes` and `beta_mim ≥ beta_bayes`, up to `slack`.
    pub fn mim_dominates_misses(&self, slack: f64) -> bool {
        self.rates_mim.alpha <= self.rates_bayes.alpha + slack && self.rates_mim.beta + slack >= self.rates_bayes.beta
    }
}

/// A grid point (or one source at it) that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub sweep_value: f64,
    /// `None` when the whole point failed (e.g. calibration).
    pub source: Option<RateSource>,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutput {
    /// Ordered by grid index, then source.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

impl SweepOutput {
    pub fn rows_from(&self, source: RateSource) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.source == source)
    }
}

/// Inclusive grid `from, from + step, …, to`.
pub fn linear_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(Error::invalid("grid", "bounds and step must be finite"));
    }
    if step <= 0.0 || to < from {
        return Err(Error::invalid(
            "grid",
            format!("need step > 0 and to >= from, got {from}..{to} by {step}"),
        ));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| from + i as f64 * step).collect())
}

pub fn run_prior_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    if spec.kind != SweepKind::PriorRatio {
        return Err(Error::invalid("sweep kind", "expected a prior-ratio sweep"));
    }
    run_sweep(spec)
}

pub fn run_mean_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    if spec.kind != SweepKind::MeanSeparation {
        return Err(Error::invalid("sweep kind", "expected a mean-separation sweep"));
    }
    run_sweep(spec)
}

/// Runs either kind of sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let per_point: Vec<(Vec<SweepRow>, Vec<SweepFailure>)> = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &value)| evaluate_point(spec, value, child_seed(spec.seed, i as u64)))
        .collect();
    let mut out = SweepOutput::default();
    for (rows, failures) in per_point {
        out.rows.extend(rows);
        out.failures.extend(failures);
    }
    Ok(out)
}

fn evaluate_point(spec: &SweepSpec, value: f64, seed: u64) -> (Vec<SweepRow>, Vec<SweepFailure>) {
    let whole = |error: Error| {
        (
            Vec::new(),
            vec![SweepFailure {
                sweep_value: value,
                source: None,
                error,
            }],
        )
    };

    let (priors, d_a, d_b) = match spec.model_at(value) {
        Ok(m) => m,
        Err(e) => return whole(e),
    };
    let s0 = match spec.frozen_s0 {
        Some(s0) => s0,
        None => {
            let calibrated = sample_n(&d_a, spec.calibration_size, child_seed(seed, 0))
                .and_then(|training| calibrate_s0(&training, priors, &d_a, &d_b));
            match calibrated {
                Ok(c) => c.s0,
                Err(e) => return whole(e),
            }
        }
    };
    let model = DetectorModel::new(priors, d_a, d_b).with_s0(s0);

    let mut rows = Vec::with_capacity(2);
    let mut failures = Vec::new();
    for source in [RateSource::MonteCarlo, RateSource::Quadrature] {
        match evaluate_source(&model, source, spec, child_seed(seed, 1)) {
            Ok((rates_bayes, rates_mim)) => rows.push(SweepRow {
                sweep_value: value,
                source,
                s0: s0.get(),
                rates_bayes,
                rates_mim,
            }),
            Err(error) => failures.push(SweepFailure {
                sweep_value: value,
                source: Some(source),
                error,
            }),
        }
    }
    (rows, failures)
}

fn evaluate_source(
    model: &DetectorModel,
    source: RateSource,
    spec: &SweepSpec,
    seed: u64,
) -> Result<(ErrorRates, ErrorRates)> {
    let bayes = model.decider(DetectorKind::Bayes)?;
    let mim = model.decider(DetectorKind::Mim)?;
    let priors = model.priors();
    match source {
        RateSource::Quadrature => {
            let (a, b) = (model.density_a(), model.density_b());
            Ok((
                error_rates_quadrature(|x| bayes.verdict(x), priors, a, b, spec.tol)?,
                error_rates_quadrature(|x| mim.verdict(x), priors, a, b, spec.tol)?,
            ))
        }
        RateSource::MonteCarlo => {
            let samples = sample_mixture(priors, model.density_a(), model.density_b(), spec.n_samples, seed)?;
            Ok((
                error_rates_monte_carlo(|x| bayes.verdict(x), &samples, priors)?,
                error_rates_monte_carlo(|x| mim.verdict(x), &samples, priors)?,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SweepKind) -> SweepSpec {
        let base = match kind {
            SweepKind::PriorRatio => SweepSpec::prior_ratio_default(),
            SweepKind::MeanSeparation => SweepSpec::mean_separation_default(),
        };
        SweepSpec {
            n_samples: 200_000,
            calibration_size: 2_000,
            ..base
        }
    }

    #[test]
    fn grids() {
        assert_eq!(linear_grid(1.0, 4.0, 0.5).unwrap().len(), 7);
        let g = linear_grid(0.2, 0.8, 0.05).unwrap();
        assert_eq!(g.len(), 13);
        assert!((g[12] - 0.8).abs() < 1e-12);
        assert_eq!(linear_grid(2.0, 2.0, 1.0).unwrap(), vec![2.0]);
        assert!(linear_grid(1.0, 0.0, 0.1).is_err());
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn validation() {
        let mut s = small(SweepKind::PriorRatio);
        s.grid = vec![1.0, 1.0];
        assert!(run_sweep(&s).is_err());
        s.grid = vec![];
        assert!(run_sweep(&s).is_err());
        let s = SweepSpec {
            n_samples: 0,
            ..small(SweepKind::PriorRatio)
        };
        assert!(run_sweep(&s).is_err());
        assert!(run_mean_sweep(&small(SweepKind::PriorRatio)).is_err());
        assert!(run_prior_sweep(&small(SweepKind::MeanSeparation)).is_err());
    }

    #[test]
    fn rows_ordered_and_deterministic() {
        let spec = small(SweepKind::PriorRatio);
        let a = run_prior_sweep(&spec).unwrap();
        let b = run_prior_sweep(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert_eq!(a.rows.len(), 2 * spec.grid.len());
        for (pair, value) in a.rows.chunks(2).zip(&spec.grid) {
            assert_eq!(pair[0].source, RateSource::MonteCarlo);
            assert_eq!(pair[1].source, RateSource::Quadrature);
            assert_eq!(pair[0].sweep_value, *value);
            assert_eq!(pair[0].s0, pair[1].s0);
        }
    }

    #[test]
    fn superset_holds_on_every_row() {
        let out = run_mean_sweep(&small(SweepKind::MeanSeparation)).unwrap();
        for r in &out.rows {
            let slack = if r.source == RateSource::Quadrature { 2e-10 } else { 0.0 };
            assert!(r.mim_dominates_misses(slack), "{r:?}");
        }
    }

    #[test]
    fn single_point_and_frozen_s0() {
        let spec = SweepSpec {
            grid: vec![0.3],
            frozen_s0: Some(ImportanceCoeff::new(40.0).unwrap()),
            ..small(SweepKind::MeanSeparation)
        };
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows.iter().all(|r| r.s0 == 40.0));
    }

    #[test]
    fn missing_minor_samples_flag_the_source() {
        // ~2e-4 expected B samples: Monte Carlo cannot estimate alpha
        let spec = SweepSpec {
            grid: vec![8.0],
            n_samples: 2_000,
            ..small(SweepKind::PriorRatio)
        };
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].source, RateSource::Quadrature);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].source, Some(RateSource::MonteCarlo));
    }

    #[test]
    fn degenerate_calibration_flags_the_point() {
        let spec = SweepSpec {
            kind: SweepKind::MeanSeparation,
            grid: vec![0.0],
            density_b: GaussianDensity::new(0.0, 0.126).unwrap(),
            priors: PriorPair::new(0.5, 0.5).unwrap(),
            ..small(SweepKind::MeanSeparation)
        };
        let out = run_sweep(&spec).unwrap();
        assert!(out.rows.is_empty());
        assert!(matches!(out.failures[0].error, Error::Calibration { .. }));
        assert_eq!(out.failures[0].source, None);
    }
}
