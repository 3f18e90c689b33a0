//! Shared fixtures for the benchmarks under `benches/`.

use mimdetect_core::{calibrate_s0, sample_n, DetectorModel, GaussianDensity, PriorPair};

/// The prior-ratio setting at `log10(w_A/w_B) = r`, calibrated on 10⁴ draws.
pub fn prior_ratio_model(r: f64) -> DetectorModel {
    let priors = PriorPair::from_log10_ratio(r).expect("valid ratio");
    let d_a = GaussianDensity::new(0.0, 0.126).expect("valid density");
    let d_b = GaussianDensity::new(0.5, 0.1).expect("valid density");
    let training = sample_n(&d_a, 10_000, 1).expect("non-empty");
    let cal = calibrate_s0(&training, priors, &d_a, &d_b).expect("calibrates");
    DetectorModel::new(priors, d_a, d_b).with_s0(cal.s0)
}
