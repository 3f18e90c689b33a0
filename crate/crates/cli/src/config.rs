//! Run configuration: built-in presets, TOML config files and flags.
//!
//! Later layers win: flags over config file over preset.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use mimdetect_core::{GaussianDensity, ImportanceCoeff, PriorPair, SweepKind};

use crate::error::{CliError, Result};

/// Named parameter sets matching the reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// w_A = 0.999, p_A = N(0, 0.126²), p_B = N(0.35, 0.1²).
    Fig1,
    /// Prior-ratio sweep densities p_A = N(0, 0.126²), p_B = N(0.5, 0.1²); priors at log10(w_A/w_B) = 3.
    Fig3,
    /// Mean-separation sweep: w_A = 0.992, p_A = N(0, 0.126²), p_B = N(0.5, 0.1²).
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    PriorRatio,
    MeanSeparation,
}

impl From<KindArg> for SweepKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::PriorRatio => SweepKind::PriorRatio,
            KindArg::MeanSeparation => SweepKind::MeanSeparation,
        }
    }
}

/// Every tunable, each optional until layers are merged.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Prior of the normal event A.
    #[arg(long = "wA")]
    #[serde(rename = "wA")]
    pub w_a: Option<f64>,
    /// Prior of the minor event B.
    #[arg(long = "wB")]
    #[serde(rename = "wB")]
    pub w_b: Option<f64>,
    #[arg(long = "meanA", allow_negative_numbers = true)]
    #[serde(rename = "meanA")]
    pub mean_a: Option<f64>,
    #[arg(long = "stdA")]
    #[serde(rename = "stdA")]
    pub std_a: Option<f64>,
    #[arg(long = "meanB", allow_negative_numbers = true)]
    #[serde(rename = "meanB")]
    pub mean_b: Option<f64>,
    #[arg(long = "stdB")]
    #[serde(rename = "stdB")]
    pub std_b: Option<f64>,
    /// Magnifier coefficient; skips calibration (freezes it in sweeps).
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample count: training size for detect/calibrate, Monte Carlo size for sweep.
    #[arg(long)]
    pub n: Option<usize>,
    /// Numerical tolerance (quadrature, or the Chernoff balance).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "grid-from", allow_negative_numbers = true)]
    #[serde(rename = "grid-from")]
    pub grid_from: Option<f64>,
    #[arg(long = "grid-to", allow_negative_numbers = true)]
    #[serde(rename = "grid-to")]
    pub grid_to: Option<f64>,
    #[arg(long = "grid-step")]
    #[serde(rename = "grid-step")]
    pub grid_step: Option<f64>,
    /// Training-set size used to calibrate s0 at each sweep point.
    #[arg(long = "calibration-size")]
    #[serde(rename = "calibration-size")]
    pub calibration_size: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

impl Settings {
    /// Fills every field of `self` that is unset from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            w_a: self.w_a.or(lower.w_a),
            w_b: self.w_b.or(lower.w_b),
            mean_a: self.mean_a.or(lower.mean_a),
            std_a: self.std_a.or(lower.std_a),
            mean_b: self.mean_b.or(lower.mean_b),
            std_b: self.std_b.or(lower.std_b),
            s0: self.s0.or(lower.s0),
            seed: self.seed.or(lower.seed),
            n: self.n.or(lower.n),
            tol: self.tol.or(lower.tol),
            grid_from: self.grid_from.or(lower.grid_from),
            grid_to: self.grid_to.or(lower.grid_to),
            grid_step: self.grid_step.or(lower.grid_step),
            calibration_size: self.calibration_size.or(lower.calibration_size),
            kind: self.kind.or(lower.kind),
            preset: self.preset.or(lower.preset),
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Merges flags, an optional config file and the selected preset.
    pub fn resolve(flags: Settings, config: Option<&PathBuf>) -> Result<Settings> {
        let file = match config {
            Some(p) => Settings::from_toml_file(p)?,
            None => Settings::default(),
        };
        let layered = flags.over(file);
        Ok(match layered.preset {
            Some(p) => layered.over(p.settings()),
            None => layered,
        })
    }

    pub fn priors(&self) -> Result<PriorPair> {
        let priors = match (self.w_a, self.w_b) {
            (Some(a), Some(b)) => PriorPair::new(a, b),
            (Some(a), None) => PriorPair::new(a, 1.0 - a),
            (None, Some(b)) => PriorPair::from_minor(b),
            (None, None) => return Err(missing("--wA/--wB")),
        };
        Ok(priors?)
    }

    pub fn density_a(&self) -> Result<GaussianDensity> {
        let mean = self.mean_a.ok_or_else(|| missing("--meanA"))?;
        let std = self.std_a.ok_or_else(|| missing("--stdA"))?;
        Ok(GaussianDensity::new(mean, std)?)
    }

    pub fn density_b(&self) -> Result<GaussianDensity> {
        let mean = self.mean_b.ok_or_else(|| missing("--meanB"))?;
        let std = self.std_b.ok_or_else(|| missing("--stdB"))?;
        Ok(GaussianDensity::new(mean, std)?)
    }

    pub fn s0(&self) -> Result<Option<ImportanceCoeff>> {
        Ok(self.s0.map(ImportanceCoeff::new).transpose()?)
    }

    pub fn tol_or(&self, default: f64) -> Result<f64> {
        let tol = self.tol.unwrap_or(default);
        if tol.is_finite() && tol > 0.0 {
            Ok(tol)
        } else {
            Err(CliError::Validation(format!("--tol must be finite and > 0, got {tol}")))
        }
    }
}

fn missing(flag: &str) -> CliError {
    CliError::Validation(format!(
        "missing {flag} (set it with a flag, a config file or --preset)"
    ))
}

impl Preset {
    pub fn settings(self) -> Settings {
        let common = Settings {
            mean_a: Some(0.0),
            std_a: Some(0.126),
            std_b: Some(0.1),
            preset: Some(self),
            ..Settings::default()
        };
        match self {
            Preset::Fig1 => Settings {
                w_a: Some(0.999),
                w_b: Some(0.001),
                mean_b: Some(0.35),
                ..common
            },
            Preset::Fig3 => Settings {
                w_a: Some(1000.0 / 1001.0),
                w_b: Some(1.0 / 1001.0),
                mean_b: Some(0.5),
                kind: Some(KindArg::PriorRatio),
                ..common
            },
            Preset::Fig4 => Settings {
                w_a: Some(0.992),
                w_b: Some(0.008),
                mean_b: Some(0.5),
                kind: Some(KindArg::MeanSeparation),
                ..common
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_config_beat_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "preset = \"fig1\"\nwB = 0.01\nmeanB = 0.4\nseed = 9\n").unwrap();
        let flags = Settings {
            mean_b: Some(0.45),
            ..Settings::default()
        };
        let s = Settings::resolve(flags, Some(&path)).unwrap();
        assert_eq!(s.mean_b, Some(0.45));
        assert_eq!(s.w_b, Some(0.01));
        assert_eq!(s.seed, Some(9));
        assert_eq!(s.std_a, Some(0.126));
        // preset w_A is kept, so the pair no longer sums to one
        assert!(s.priors().is_err());
    }

    #[test]
    fn one_prior_implies_the_other() {
        let s = Settings {
            w_b: Some(0.25),
            ..Settings::default()
        };
        let p = s.priors().unwrap();
        assert_eq!((p.w_a(), p.w_b()), (0.75, 0.25));
        assert!(Settings::default().priors().is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "wc = 0.3\n").unwrap();
        assert!(matches!(
            Settings::resolve(Settings::default(), Some(&path)),
            Err(CliError::Validation(_))
        ));
        let missing = dir.path().join("nope.toml");
        assert!(matches!(
            Settings::resolve(Settings::default(), Some(&missing)),
            Err(CliError::Io { .. })
        ));
    }

    #[test]
    fn presets_are_valid() {
        for p in [Preset::Fig1, Preset::Fig3, Preset::Fig4] {
            let s = p.settings();
            s.priors().unwrap();
            s.density_a().unwrap();
            s.density_b().unwrap();
        }
        assert!((Preset::Fig3.settings().priors().unwrap().log10_ratio() - 3.0).abs() < 1e-12);
    }
}
