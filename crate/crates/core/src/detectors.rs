//! Bayes and magnifier-augmented (MIM) detectors, and calibration of the
//! magnifier coefficient from normal-event training data.
//!
//! With `u = w_A·p_A(x)` and `v = w_B·p_B(x)` the Bayes rule decides A iff
//! `u > v`. The MIM rule decides A iff `u > v` **and** `f(u) < f(v)` for the
//! magnifier `f(p) = p·e^{-s0·p}`; everything else, ties included, is B.
//! When `v < 1/s0 < u`, `f(u) < f(v)` says that `u` still exceeds `v`'s
//! equal-importance partner above `1/s0`, so the rule compares `u` with a
//! magnified `v`. Both comparisons run in the log domain, which keeps them
//! exact when `u` or `v` underflow.
//!
//! Every x the Bayes rule assigns to B is also B under the MIM rule, so the
//! MIM miss rate never exceeds the Bayes one and its false-alarm rate is never
//! lower.

use crate::distributions::{Density, Event, GaussianDensity, PriorPair};
use crate::error::{Error, Result};
use crate::mim::{ln_magnify, ImportanceCoeff};

/// Relative gap below which the two training means count as equal.
pub const CALIBRATION_DEGENERACY_TOL: f64 = 1e-15;

/// Which decision rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Bayes,
    Mim,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Bayes => "bayes",
            DetectorKind::Mim => "mim",
        }
    }
}

/// Priors, the two conditional densities and, for the MIM rule, `s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel<D = GaussianDensity> {
    priors: PriorPair,
    d_a: D,
    d_b: D,
    s0: Option<ImportanceCoeff>,
}

/// Outcome of deciding one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub verdict: Event,
    /// `ln(w_A·p_A(x)) − ln(w_B·p_B(x))`.
    pub bayes_score: f64,
    /// `ln f(u) − ln f(v)`; negative values favour A. `None` for Bayes.
    pub mim_score: Option<f64>,
}

impl<D: Density> DetectorModel<D> {
    pub fn new(priors: PriorPair, d_a: D, d_b: D) -> Self {
        Self {
            priors,
            d_a,
            d_b,
            s0: None,
        }
    }

    pub fn with_s0(mut self, s0: ImportanceCoeff) -> Self {
        self.s0 = Some(s0);
        self
    }

    pub fn priors(&self) -> PriorPair {
        self.priors
    }

    pub fn density_a(&self) -> &D {
        &self.d_a
    }

    pub fn density_b(&self) -> &D {
        &self.d_b
    }

    pub fn s0(&self) -> Option<ImportanceCoeff> {
        self.s0
    }

    /// `(ln u, ln v)` at `x`.
    #[inline]
    pub fn weighted_ln(&self, x: f64) -> (f64, f64) {
        (
            self.priors.w_a().ln() + self.d_a.ln_pdf(x),
            self.priors.w_b().ln() + self.d_b.ln_pdf(x),
        )
    }

    pub fn bayes_decide(&self, x: f64) -> Result<Decision> {
        check_observation(x)?;
        let (ln_u, ln_v) = self.weighted_ln(x);
        let bayes_score = ln_u - ln_v;
        Ok(Decision {
            verdict: bayes_rule(ln_u, ln_v),
            bayes_score,
            mim_score: None,
        })
    }

    pub fn mim_decide(&self, x: f64) -> Result<Decision> {
        let s0 = self.s0.ok_or(Error::MissingS0)?;
        check_observation(x)?;
        let (ln_u, ln_v) = self.weighted_ln(x);
        let (verdict, mim_score) = mim_rule(ln_u, ln_v, s0);
        Ok(Decision {
            verdict,
            bayes_score: ln_u - ln_v,
            mim_score: Some(mim_score),
        })
    }

    pub fn decide(&self, kind: DetectorKind, x: f64) -> Result<Decision> {
        match kind {
            DetectorKind::Bayes => self.bayes_decide(x),
            DetectorKind::Mim => self.mim_decide(x),
        }
    }

    /// A verdict-only view for bulk evaluation over finite observations.
    pub fn decider(&self, kind: DetectorKind) -> Result<Decider<'_, D>> {
        let s0 = match kind {
            DetectorKind::Bayes => None,
            DetectorKind::Mim => Some(self.s0.ok_or(Error::MissingS0)?),
        };
        Ok(Decider { model: self, s0 })
    }
}

/// Borrowed, configuration-checked decision function.
#[derive(Debug, Clone, Copy)]
pub struct Decider<'a, D> {
    model: &'a DetectorModel<D>,
    s0: Option<ImportanceCoeff>,
}

impl<D: Density> Decider<'_, D> {
    /// Verdict at a finite `x`.
    #[inline]
    pub fn verdict(&self, x: f64) -> Event {
        let (ln_u, ln_v) = self.model.weighted_ln(x);
        match self.s0 {
            None => bayes_rule(ln_u, ln_v),
            Some(s0) => mim_rule(ln_u, ln_v, s0).0,
        }
    }
}

fn check_observation(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("observation", format!("must be finite, got {x}")))
    }
}

/// A iff `u > v`; ties go to B.
#[inline]
pub fn bayes_rule(ln_u: f64, ln_v: f64) -> Event {
    if ln_u > ln_v {
        Event::A
    } else {
        Event::B
    }
}

/// A iff `u > v` and `f(u) < f(v)`, from `ln u` and `ln v`.
///
/// Returns the verdict and `ln f(u) − ln f(v)`.
#[inline]
pub fn mim_rule(ln_u: f64, ln_v: f64, s0: ImportanceCoeff) -> (Event, f64) {
    let s = s0.get();
    let score = ln_magnify(ln_u, s) - ln_magnify(ln_v, s);
    let verdict = if ln_u > ln_v && score < 0.0 { Event::A } else { Event::B };
    (verdict, score)
}

/// Result of calibrating `s0` on a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub s0: ImportanceCoeff,
    /// Mean of `w_A·p_A(x_i)` over the training points.
    pub m_a: f64,
    /// Mean of `w_B·p_B(x_i)` over the training points.
    pub m_b: f64,
    pub n: usize,
}

/// Picks `s0` so that the magnifier gives equal importance to the training
/// means of `w_A·p_A(x)` and `w_B·p_B(x)`.
///
/// `training` should come from the normal event A; it need not contain any
/// minor-event samples. Means are accumulated in the log domain.
pub fn calibrate_s0<D: Density>(training: &[f64], priors: PriorPair, d_a: &D, d_b: &D) -> Result<Calibration> {
    if training.is_empty() {
        return Err(Error::Calibration {
            reason: "empty training set".into(),
            m_a: f64::NAN,
            m_b: f64::NAN,
        });
    }
    if let Some((i, x)) = training.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::invalid("training observation", format!("row {i} is {x}")));
    }
    let ln_n = (training.len() as f64).ln();
    let ln_m_a = log_sum_exp(training.iter().map(|&x| d_a.ln_pdf(x))) + priors.w_a().ln() - ln_n;
    let ln_m_b = log_sum_exp(training.iter().map(|&x| d_b.ln_pdf(x))) + priors.w_b().ln() - ln_n;
    let s0 = s0_from_log_means(ln_m_a, ln_m_b)?;
    Ok(Calibration {
        s0,
        m_a: ln_m_a.exp(),
        m_b: ln_m_b.exp(),
        n: training.len(),
    })
}

/// `s0 = (ln m_A − ln m_B)/(m_A − m_B)`, the positive root of
/// `m_A·e^{-s0·m_A} = m_B·e^{-s0·m_B}`.
pub fn s0_from_means(m_a: f64, m_b: f64) -> Result<ImportanceCoeff> {
    for v in [m_a, m_b] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Calibration {
                reason: format!("mean {v} is not a finite non-negative value"),
                m_a,
                m_b,
            });
        }
    }
    s0_from_log_means(m_a.ln(), m_b.ln())
}

fn s0_from_log_means(ln_m_a: f64, ln_m_b: f64) -> Result<ImportanceCoeff> {
    let (m_a, m_b) = (ln_m_a.exp(), ln_m_b.exp());
    if !(ln_m_a.is_finite() && ln_m_b.is_finite()) {
        return Err(Error::Calibration {
            reason: "a training mean is zero, its logarithm is undefined".into(),
            m_a,
            m_b,
        });
    }
    let d = ln_m_a - ln_m_b;
    if d.exp_m1().abs() <= CALIBRATION_DEGENERACY_TOL {
        return Err(Error::Calibration {
            reason: "training means coincide, s0 is not unique".into(),
            m_a,
            m_b,
        });
    }
    // m_A − m_B from the larger mean so the smaller one may underflow
    let gap = if d > 0.0 {
        m_a * -(-d).exp_m1()
    } else {
        -(m_b * -d.exp_m1())
    };
    ImportanceCoeff::new(d / gap).map_err(|_| Error::Calibration {
        reason: format!("closed form gave s0 = {}", d / gap),
        m_a,
        m_b,
    })
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(m: f64, s: f64) -> GaussianDensity {
        GaussianDensity::new(m, s).unwrap()
    }

    fn coeff(v: f64) -> ImportanceCoeff {
        ImportanceCoeff::new(v).unwrap()
    }

    fn fig1() -> DetectorModel {
        DetectorModel::new(PriorPair::new(0.999, 0.001).unwrap(), n(0.0, 0.126), n(0.35, 0.1))
    }

    #[test]
    fn identical_hypotheses_tie_to_b() {
        let m = DetectorModel::new(PriorPair::new(0.5, 0.5).unwrap(), n(0.0, 1.0), n(0.0, 1.0));
        let d = m.bayes_decide(0.3).unwrap();
        assert_eq!(d.bayes_score, 0.0);
        assert_eq!(d.verdict, Event::B);
    }

    #[test]
    fn equal_priors_boundary_at_midpoint() {
        let mu = 1.4;
        let m = DetectorModel::new(PriorPair::new(0.5, 0.5).unwrap(), n(0.0, 0.7), n(mu, 0.7));
        assert_eq!(m.bayes_decide(mu / 2.0 - 1e-9).unwrap().verdict, Event::A);
        assert_eq!(m.bayes_decide(mu / 2.0 + 1e-9).unwrap().verdict, Event::B);
        assert!(m.bayes_decide(mu / 2.0).unwrap().bayes_score.abs() < 1e-12);
    }

    #[test]
    fn fig1_bayes_misses_at_minor_centre() {
        let m = fig1();
        let d = m.bayes_decide(0.35).unwrap();
        assert_eq!(d.verdict, Event::A);
        // u ≈ 0.0672, v ≈ 0.00399
        let u = 0.999 * n(0.0, 0.126).pdf(0.35);
        let v = 0.001 * n(0.35, 0.1).pdf(0.35);
        assert!(u > v);
        assert!((d.bayes_score - (u / v).ln()).abs() < 1e-12);
    }

    #[test]
    fn mim_rule_hand_values() {
        let s0 = coeff(10.0);
        // f(0.2) = 0.02707 < f(ln2/10) = 0.03466: 0.2 still beats the partner 2·ln2/10
        let (v, score) = mim_rule(0.2f64.ln(), (std::f64::consts::LN_2 / 10.0).ln(), s0);
        assert_eq!(v, Event::A);
        assert!(score < 0.0);
        // both below 1/s0: f keeps the order, f(u) > f(v), so the partner of v wins
        let (v, score) = mim_rule(0.05f64.ln(), 0.01f64.ln(), s0);
        assert_eq!(v, Event::B);
        assert!(score > 0.0);
        // Bayes already says B
        let (v, _) = mim_rule(0.01f64.ln(), 0.05f64.ln(), s0);
        assert_eq!(v, Event::B);
        // u = v ties to B
        let (v, _) = mim_rule(0.3f64.ln(), 0.3f64.ln(), s0);
        assert_eq!(v, Event::B);
    }

    #[test]
    fn mim_handles_underflowed_weights() {
        let m = fig1().with_s0(coeff(30.0));
        let x = -3.5;
        let (ln_u, ln_v) = m.weighted_ln(x);
        assert_eq!(ln_v.exp(), 0.0);
        assert!(ln_u.exp() > 0.0 && ln_u.exp() < 1.0 / 30.0);
        let d = m.mim_decide(x).unwrap();
        // u sits on the rising branch, so f(u) > f(v) even though v is gone
        assert!(d.mim_score.unwrap().is_finite() && d.mim_score.unwrap() > 0.0);
        assert_eq!(d.verdict, Event::B);
        // in A's bulk u is past the peak and beats the magnified v
        assert_eq!(m.mim_decide(0.0).unwrap().verdict, Event::A);
    }

    #[test]
    fn decide_errors() {
        let m = fig1();
        assert!(matches!(m.mim_decide(0.1), Err(Error::MissingS0)));
        assert!(matches!(m.decider(DetectorKind::Mim), Err(Error::MissingS0)));
        assert!(m.bayes_decide(f64::NAN).is_err());
        assert!(m.clone().with_s0(coeff(1.0)).mim_decide(f64::INFINITY).is_err());
    }

    #[test]
    fn log_domain_matches_direct_ratio() {
        let m = fig1();
        for i in 0..2000 {
            let x = -0.8 + 1.8 * i as f64 / 2000.0;
            let u = 0.999 * m.density_a().pdf(x);
            let v = 0.001 * m.density_b().pdf(x);
            if u > 0.0 && v > 0.0 && (u / v - 1.0).abs() > 1e-9 {
                let direct = if u / v > 1.0 { Event::A } else { Event::B };
                assert_eq!(m.bayes_decide(x).unwrap().verdict, direct, "x = {x}");
            }
        }
    }

    #[test]
    fn calibration_closed_forms() {
        assert!((s0_from_means(2.0, 1.0).unwrap().get() - std::f64::consts::LN_2).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((s0_from_means(e, 1.0).unwrap().get() - 0.581_976_706_869_326_4).abs() < 1e-15);
        assert!(matches!(s0_from_means(1.0, 1.0), Err(Error::Calibration { .. })));
        assert!(matches!(s0_from_means(1.0, 0.0), Err(Error::Calibration { .. })));
        assert!(matches!(
            s0_from_means(1.0, 1.0 + 1e-16),
            Err(Error::Calibration { .. })
        ));
    }

    #[test]
    fn calibration_from_training() {
        // a single training point at the shared peak of two identical
        // densities with peak value 3: m_A = 2, m_B = 1
        let std = 1.0 / (3.0 * (2.0 * std::f64::consts::PI).sqrt());
        let d = n(0.0, std);
        let pr = PriorPair::new(2.0 / 3.0, 1.0 / 3.0).unwrap();
        let cal = calibrate_s0(&[0.0], pr, &d, &d).unwrap();
        assert!((cal.m_a - 2.0).abs() < 1e-14 && (cal.m_b - 1.0).abs() < 1e-14);
        assert!((cal.s0.get() - std::f64::consts::LN_2).abs() < 1e-13);
        assert!(matches!(calibrate_s0(&[], pr, &d, &d), Err(Error::Calibration { .. })));
        assert!(calibrate_s0(&[f64::NAN], pr, &d, &d).is_err());
    }

    #[test]
    fn calibration_degenerate_when_models_coincide() {
        let d = n(0.0, 1.0);
        let pr = PriorPair::new(0.5, 0.5).unwrap();
        assert!(matches!(
            calibrate_s0(&[0.1, 0.2], pr, &d, &d),
            Err(Error::Calibration { .. })
        ));
    }

    #[test]
    fn calibration_survives_underflowing_minor_mean() {
        let pr = PriorPair::new(0.9, 0.1).unwrap();
        let cal = calibrate_s0(&[0.0, 0.01], pr, &n(0.0, 0.1), &n(50.0, 0.1)).unwrap();
        assert_eq!(cal.m_b, 0.0);
        assert!(cal.s0.get().is_finite() && cal.s0.get() > 0.0);
    }

    proptest! {
        #[test]
        fn calibration_balances_importance(la in -12.0f64..4.0, lb in -12.0f64..4.0) {
            prop_assume!((la - lb).abs() > 1e-6);
            let (m_a, m_b) = (10f64.powf(la), 10f64.powf(lb));
            let s0 = s0_from_means(m_a, m_b).unwrap().get();
            let fa = m_a * (-s0 * m_a).exp();
            let fb = m_b * (-s0 * m_b).exp();
            prop_assert!((fa - fb).abs() <= 1e-12 * fa, "fa={} fb={}", fa, fb);
        }

        #[test]
        fn calibration_scales_inversely(la in -6.0f64..2.0, lb in -6.0f64..2.0, lc in -3.0f64..3.0) {
            prop_assume!((la - lb).abs() > 1e-3);
            let (m_a, m_b, c) = (10f64.powf(la), 10f64.powf(lb), 10f64.powf(lc));
            let s = s0_from_means(m_a, m_b).unwrap().get();
            let sc = s0_from_means(c * m_a, c * m_b).unwrap().get();
            prop_assert!((sc - s / c).abs() <= 1e-12 * sc);
        }

        #[test]
        fn mim_b_region_contains_bayes_b_region(x in -2.0f64..2.5, s in 0.01f64..1000.0) {
            let m = fig1().with_s0(coeff(s));
            if m.bayes_decide(x).unwrap().verdict == Event::B {
                prop_assert_eq!(m.mim_decide(x).unwrap().verdict, Event::B);
            }
        }

        #[test]
        fn vanishing_s0_flags_everything(x in -2.0f64..2.5) {
            let m = fig1().with_s0(coeff(1e-9));
            prop_assert_eq!(m.mim_decide(x).unwrap().verdict, Event::B);
        }

        #[test]
        fn huge_s0_recovers_bayes(x in -2.0f64..2.5) {
            let m = fig1().with_s0(coeff(1e9));
            let (_, ln_v) = m.weighted_ln(x);
            prop_assume!(ln_v.exp() > 1e-9);
            prop_assert_eq!(m.mim_decide(x).unwrap().verdict, m.bayes_decide(x).unwrap().verdict);
        }
    }
}
