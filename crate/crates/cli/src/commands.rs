//! Subcommand implementations. Every command validates its whole
//! configuration before computing and writes its files only at the end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mimdetect_core::experiments::{DEFAULT_CALIBRATION_SIZE, DEFAULT_N_SAMPLES, DEFAULT_QUADRATURE_TOL, DEFAULT_SEED};
use mimdetect_core::{
    calibrate_s0, chernoff_exponent, error_rates_quadrature, linear_grid, run_sweep, sample_n, ConfusionCounts,
    DetectorKind, DetectorModel, Event, GaussianDensity, PriorPair, SweepKind, SweepSpec,
};

use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::plot::sweep_svg;
use crate::table::{format_short, format_sig, Cell, ResultsTable};
use crate::{CalibrateArgs, ChernoffArgs, Common, DetectArgs, SweepArgs};

/// Chernoff balance tolerance when `--tol` is absent.
pub const DEFAULT_CHERNOFF_TOL: f64 = 1e-8;

pub const DECISION_COLUMNS: [&str; 5] = ["x", "verdict_bayes", "verdict_mim", "bayes_score", "mim_score"];
pub const SUMMARY_COLUMNS: [&str; 9] = [
    "detector", "alpha", "beta", "pe", "n_a", "n_b", "a_as_a", "a_as_b", "b_as_a",
];
pub const CALIBRATION_COLUMNS: [&str; 5] = ["s0", "m_a", "m_b", "n", "seed"];
pub const SWEEP_COLUMNS: [&str; 9] = [
    "sweep_value",
    "source",
    "s0",
    "alpha_bayes",
    "beta_bayes",
    "pe_bayes",
    "alpha_mim",
    "beta_mim",
    "pe_mim",
];
pub const FAILURE_COLUMNS: [&str; 3] = ["sweep_value", "source", "error"];
pub const CHERNOFF_COLUMNS: [&str; 7] = [
    "lambda_star",
    "d_star",
    "d_to_a",
    "d_to_b",
    "pe_bayes",
    "neg_ln_pe_bayes",
    "degenerate",
];

fn resolve(common: &Common) -> Result<Settings> {
    Settings::resolve(common.settings.clone(), common.config.as_ref())
}

fn out_path(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

/// `runs/out.csv` → `runs/out.<tag>.csv`.
pub fn sidecar(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn say(stdout: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    stdout
        .write_fmt(text)
        .and_then(|_| stdout.write_all(b"\n"))
        .map_err(|e| CliError::io("<stdout>", e))
}

fn sample_count(settings: &Settings, default: usize) -> Result<usize> {
    match settings.n.unwrap_or(default) {
        0 => Err(CliError::Validation("--n must be at least 1".into())),
        n => Ok(n),
    }
}

/// One row of an observation file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub x: f64,
    pub label: Option<Event>,
}

/// Reads a CSV with a mandatory `x` column and an optional `label` column.
pub fn read_observations(path: &Path) -> Result<Vec<Observation>> {
    let csv_err = |source| CliError::Csv {
        path: path.into(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    let x_col = header
        .iter()
        .position(|h| h.trim() == "x")
        .ok_or_else(|| CliError::Input {
            path: path.into(),
            line: 1,
            message: "header has no `x` column".into(),
        })?;
    let label_col = header.iter().position(|h| h.trim() == "label");

    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Input {
            path: path.into(),
            line,
            message,
        };
        let raw = rec.get(x_col).unwrap_or("").trim();
        let x: f64 = raw.parse().map_err(|_| bad(format!("x = {raw:?} is not a number")))?;
        if !x.is_finite() {
            return Err(bad(format!("x = {raw:?} is not finite")));
        }
        let label = match label_col {
            None => None,
            Some(c) => {
                let raw = rec.get(c).unwrap_or("").trim();
                Some(
                    raw.parse::<Event>()
                        .map_err(|_| bad(format!("label = {raw:?}, expected A or B")))?,
                )
            }
        };
        out.push(Observation { x, label });
    }
    if out.is_empty() {
        return Err(CliError::Input {
            path: path.into(),
            line: 1,
            message: "no observations".into(),
        });
    }
    Ok(out)
}

/// The detector model described by `settings`; s0 is calibrated unless given.
fn detector_model(settings: &Settings) -> Result<DetectorModel> {
    let priors = settings.priors()?;
    let (d_a, d_b) = (settings.density_a()?, settings.density_b()?);
    let model = DetectorModel::new(priors, d_a, d_b);
    if let Some(s0) = settings.s0()? {
        return Ok(model.with_s0(s0));
    }
    let n = sample_count(settings, DEFAULT_CALIBRATION_SIZE)?;
    let training = sample_n(&d_a, n, settings.seed.unwrap_or(DEFAULT_SEED))?;
    let cal = calibrate_s0(&training, priors, &d_a, &d_b)?;
    Ok(model.with_s0(cal.s0))
}

pub fn detect(args: &DetectArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.common)?;
    let model = detector_model(&settings)?;
    let observations = read_observations(&args.input)?;
    let out = out_path(&args.common, "decisions.csv");

    let mut table = ResultsTable::new(DECISION_COLUMNS);
    let mut counts = [ConfusionCounts::default(); 2];
    let labelled = observations.iter().all(|o| o.label.is_some());
    for o in &observations {
        let bayes = model.bayes_decide(o.x)?;
        let mim = model.mim_decide(o.x)?;
        let mim_score = mim.mim_score.expect("MIM decisions carry a score");
        table.push(vec![
            Cell::Num(o.x),
            Cell::text(bayes.verdict.as_str()),
            Cell::text(mim.verdict.as_str()),
            Cell::Num(bayes.bayes_score),
            Cell::Num(mim_score),
        ])?;
        if let Some(label) = o.label {
            counts[0].record(label, bayes.verdict);
            counts[1].record(label, mim.verdict);
        }
    }

    let summary = if labelled {
        Some(summary_table(&counts, model.priors())?)
    } else {
        None
    };
    table.write(&out)?;
    say(
        stdout,
        format_args!("wrote {} decisions to {}", table.len(), out.display()),
    )?;
    if let Some(summary) = summary {
        let path = sidecar(&out, "summary", "csv");
        summary.write(&path)?;
        for (kind, c) in [DetectorKind::Bayes, DetectorKind::Mim].into_iter().zip(&counts) {
            let (alpha, beta, pe) = rates_of(c, model.priors());
            let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), format_short);
            say(
                stdout,
                format_args!(
                    "{:<5} alpha = {}  beta = {}  pe = {}",
                    kind.as_str(),
                    show(alpha),
                    show(beta),
                    show(pe)
                ),
            )?;
        }
        say(stdout, format_args!("wrote summary to {}", path.display()))?;
    }
    Ok(())
}

/// Empirical rates; a rate is `None` when its class has no samples.
fn rates_of(c: &ConfusionCounts, priors: PriorPair) -> (Option<f64>, Option<f64>, Option<f64>) {
    let alpha = (c.n_b() > 0).then(|| c.b_as_a as f64 / c.n_b() as f64);
    let beta = (c.n_a() > 0).then(|| c.a_as_b as f64 / c.n_a() as f64);
    let pe = alpha.zip(beta).map(|(a, b)| priors.w_b() * a + priors.w_a() * b);
    (alpha, beta, pe)
}

fn summary_table(counts: &[ConfusionCounts; 2], priors: PriorPair) -> Result<ResultsTable> {
    let mut t = ResultsTable::new(SUMMARY_COLUMNS);
    for (kind, c) in [DetectorKind::Bayes, DetectorKind::Mim].into_iter().zip(counts) {
        let (alpha, beta, pe) = rates_of(c, priors);
        let num = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
        t.push(vec![
            Cell::text(kind.as_str()),
            num(alpha),
            num(beta),
            num(pe),
            Cell::Int(c.n_a()),
            Cell::Int(c.n_b()),
            Cell::Int(c.a_as_a),
            Cell::Int(c.a_as_b),
            Cell::Int(c.b_as_a),
        ])?;
    }
    Ok(t)
}

pub fn calibrate(args: &CalibrateArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.common)?;
    let priors = settings.priors()?;
    let (d_a, d_b) = (settings.density_a()?, settings.density_b()?);
    let out = out_path(&args.common, "calibration.csv");

    let (training, seed) = match &args.input {
        Some(path) => {
            let obs = read_observations(path)?;
            // training represents the normal event; labelled B rows are dropped
            let xs: Vec<f64> = obs.iter().filter(|o| o.label != Some(Event::B)).map(|o| o.x).collect();
            if xs.is_empty() {
                return Err(CliError::Input {
                    path: path.clone(),
                    line: 1,
                    message: "no A observations".into(),
                });
            }
            (xs, None)
        }
        None => {
            let n = sample_count(&settings, DEFAULT_CALIBRATION_SIZE)?;
            let seed = settings.seed.unwrap_or(DEFAULT_SEED);
            (sample_n(&d_a, n, seed)?, Some(seed))
        }
    };
    let cal = calibrate_s0(&training, priors, &d_a, &d_b)?;

    let mut table = ResultsTable::new(CALIBRATION_COLUMNS);
    table.push(vec![
        Cell::Num(cal.s0.get()),
        Cell::Num(cal.m_a),
        Cell::Num(cal.m_b),
        Cell::Int(cal.n as u64),
        seed.map_or(Cell::Empty, Cell::Int),
    ])?;
    table.write(&out)?;
    say(stdout, format_args!("{}", format_sig(cal.s0.get(), 12)))
}

/// The sweep described by `settings`, starting from the kind's defaults.
pub fn sweep_spec(settings: &Settings) -> Result<SweepSpec> {
    let kind: SweepKind = settings
        .kind
        .ok_or_else(|| CliError::Validation("missing --kind (or a sweep preset)".into()))?
        .into();
    let base = match kind {
        SweepKind::PriorRatio => SweepSpec::prior_ratio_default(),
        SweepKind::MeanSeparation => SweepSpec::mean_separation_default(),
    };
    let (from, to, step) = match kind {
        SweepKind::PriorRatio => (1.0, 4.0, 0.5),
        SweepKind::MeanSeparation => (0.2, 0.8, 0.05),
    };
    let density = |mean: Option<f64>, std: Option<f64>, d: GaussianDensity| -> Result<GaussianDensity> {
        Ok(GaussianDensity::new(mean.unwrap_or(d.mean()), std.unwrap_or(d.std()))?)
    };
    let priors = if settings.w_a.is_some() || settings.w_b.is_some() {
        settings.priors()?
    } else {
        base.priors
    };
    let calibration_size = settings.calibration_size.unwrap_or(base.calibration_size);
    if calibration_size == 0 {
        return Err(CliError::Validation("--calibration-size must be at least 1".into()));
    }
    let spec = SweepSpec {
        kind,
        grid: linear_grid(
            settings.grid_from.unwrap_or(from),
            settings.grid_to.unwrap_or(to),
            settings.grid_step.unwrap_or(step),
        )?,
        n_samples: sample_count(settings, DEFAULT_N_SAMPLES)?,
        seed: settings.seed.unwrap_or(DEFAULT_SEED),
        calibration_size,
        density_a: density(settings.mean_a, settings.std_a, base.density_a)?,
        density_b: density(settings.mean_b, settings.std_b, base.density_b)?,
        priors,
        frozen_s0: settings.s0()?,
        tol: settings.tol_or(DEFAULT_QUADRATURE_TOL)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.common)?;
    let spec = sweep_spec(&settings)?;
    let out = out_path(&args.common, "sweep.csv");
    let result = run_sweep(&spec)?;

    let mut table = ResultsTable::new(SWEEP_COLUMNS);
    for r in &result.rows {
        table.push(vec![
            Cell::Num(r.sweep_value),
            Cell::text(r.source.as_str()),
            Cell::Num(r.s0),
            Cell::Num(r.rates_bayes.alpha),
            Cell::Num(r.rates_bayes.beta),
            Cell::Num(r.rates_bayes.pe),
            Cell::Num(r.rates_mim.alpha),
            Cell::Num(r.rates_mim.beta),
            Cell::Num(r.rates_mim.pe),
        ])?;
    }
    let mut failures = ResultsTable::new(FAILURE_COLUMNS);
    for f in &result.failures {
        let source = f.source.map_or("all", |s| s.as_str());
        eprintln!("warning: sweep point {} ({source}) failed: {}", f.sweep_value, f.error);
        failures.push(vec![
            Cell::Num(f.sweep_value),
            Cell::text(source),
            Cell::text(f.error.to_string()),
        ])?;
    }

    if !failures.is_empty() {
        let path = sidecar(&out, "failures", "csv");
        failures.write(&path)?;
        say(
            stdout,
            format_args!("wrote {} failures to {}", failures.len(), path.display()),
        )?;
    }
    if table.is_empty() {
        return Err(CliError::Computation(format!(
            "all {} sweep points failed",
            spec.grid.len()
        )));
    }
    table.write(&out)?;
    say(stdout, format_args!("wrote {} rows to {}", table.len(), out.display()))?;
    if args.plot {
        let path = out.with_extension("svg");
        fs::write(&path, sweep_svg(spec.kind, &result.rows)).map_err(|e| CliError::io(&path, e))?;
        say(stdout, format_args!("wrote plot to {}", path.display()))?;
    }
    Ok(())
}

pub fn chernoff(args: &ChernoffArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.common)?;
    let (d_a, d_b) = (settings.density_a()?, settings.density_b()?);
    let priors = if settings.w_a.is_some() || settings.w_b.is_some() {
        settings.priors()?
    } else {
        PriorPair::new(0.5, 0.5)?
    };
    let tol = settings.tol_or(DEFAULT_CHERNOFF_TOL)?;

    let c = chernoff_exponent(&d_a, &d_b, tol)?;
    let model = DetectorModel::new(priors, d_a, d_b);
    let bayes = model.decider(DetectorKind::Bayes)?;
    let pe = error_rates_quadrature(|x| bayes.verdict(x), priors, &d_a, &d_b, DEFAULT_QUADRATURE_TOL)?.pe;

    let mut table = None;
    if let Some(out) = &args.common.out {
        let mut t = ResultsTable::new(CHERNOFF_COLUMNS);
        t.push(vec![
            Cell::Num(c.lambda_star),
            Cell::Num(c.d_star),
            Cell::Num(c.d_to_a),
            Cell::Num(c.d_to_b),
            Cell::Num(pe),
            Cell::Num(-pe.ln()),
            Cell::text(c.degenerate.to_string()),
        ])?;
        table = Some((out, t));
    }

    say(stdout, format_args!("lambda* = {}", format_short(c.lambda_star)))?;
    say(stdout, format_args!("D* = {}", format_short(c.d_star)))?;
    say(stdout, format_args!("D(p_lambda*||p_A) = {}", format_short(c.d_to_a)))?;
    say(stdout, format_args!("D(p_lambda*||p_B) = {}", format_short(c.d_to_b)))?;
    say(stdout, format_args!("-ln(pe_bayes) = {}", format_short(-pe.ln())))?;
    if c.degenerate {
        say(stdout, format_args!("degenerate: the densities are indistinguishable"))?;
    }
    if let Some((out, t)) = table {
        t.write(out)?;
    }
    Ok(())
}
