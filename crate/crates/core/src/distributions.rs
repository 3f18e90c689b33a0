//! Conditional observation densities, priors and seeded sampling.
//!
//! Random streams use ChaCha12 (`rand_chacha::ChaCha12Rng`) seeded from a
//! `u64`. Independent streams for parallel work derive their seeds with
//! [`child_seed`], a SplitMix64 mix of the parent seed and the stream index,
//! so results do not depend on scheduling.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Half-width of the quadrature support hint, in standard deviations.
pub const SUPPORT_SIGMAS: f64 = 10.0;

/// Tolerance on `w_A + w_B = 1`.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// A univariate density that can be evaluated pointwise.
pub trait Density {
    fn ln_pdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Interval outside of which the density carries negligible mass.
    fn support(&self) -> (f64, f64);
}

/// A density that can also be sampled.
pub trait Sampler: Density {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// Smallest interval covering both supports.
pub fn union_support(a: &impl Density, b: &impl Density) -> (f64, f64) {
    let (a_lo, a_hi) = a.support();
    let (b_lo, b_hi) = b.support();
    (a_lo.min(b_lo), a_hi.max(b_hi))
}

/// Normal density `N(mean, std²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDensity {
    mean: f64,
    std: f64,
}

impl GaussianDensity {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid("gaussian mean", format!("must be finite, got {mean}")));
        }
        if !(std.is_finite() && std > 0.0) {
            return Err(Error::invalid(
                "gaussian std",
                format!("must be finite and > 0, got {std}"),
            ));
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Same spread, different centre.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        Self::new(mean, self.std)
    }

    /// Checked density evaluation.
    pub fn density(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.pdf(x))
    }

    /// Checked log-density evaluation.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.ln_pdf(x))
    }
}

impl Density for GaussianDensity {
    #[inline]
    fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - 0.5 * (2.0 * PI).ln()
    }

    #[inline]
    fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * PI).sqrt())
    }

    fn support(&self) -> (f64, f64) {
        (
            self.mean - SUPPORT_SIGMAS * self.std,
            self.mean + SUPPORT_SIGMAS * self.std,
        )
    }
}

impl Sampler for GaussianDensity {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.std * z
    }
}

impl fmt::Display for GaussianDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N({}, {}^2)", self.mean, self.std)
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("observation", format!("must be finite, got {x}")))
    }
}

/// Prior probabilities of the normal event A and the minor event B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorPair {
    w_a: f64,
    w_b: f64,
}

impl PriorPair {
    pub fn new(w_a: f64, w_b: f64) -> Result<Self> {
        for (name, v) in [("w_A", w_a), ("w_B", w_b)] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(Error::invalid("prior", format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if (w_a + w_b - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::invalid(
                "prior",
                format!("w_A + w_B = {} (must be 1)", w_a + w_b),
            ));
        }
        Ok(Self { w_a, w_b })
    }

    /// Priors from the minor-event probability alone.
    pub fn from_minor(w_b: f64) -> Result<Self> {
        Self::new(1.0 - w_b, w_b)
    }

    /// Priors with `log10(w_A / w_B) = r`.
    pub fn from_log10_ratio(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::invalid("prior log-ratio", format!("must be finite, got {r}")));
        }
        Self::from_minor(1.0 / (1.0 + 10f64.powf(r)))
    }

    pub fn w_a(&self) -> f64 {
        self.w_a
    }

    pub fn w_b(&self) -> f64 {
        self.w_b
    }

    pub fn log10_ratio(&self) -> f64 {
        (self.w_a / self.w_b).log10()
    }

    pub fn weight(&self, event: Event) -> f64 {
        match event {
            Event::A => self.w_a,
            Event::B => self.w_b,
        }
    }
}

/// The two hypotheses: A is the frequent event, B the minor one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    A,
    B,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::A => "A",
            Event::B => "B",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Event::A),
            "B" => Ok(Event::B),
            other => Err(Error::invalid("event label", format!("expected A or B, got {other:?}"))),
        }
    }
}

/// One observation together with the event that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub x: f64,
    pub label: Event,
}

/// Derives the seed of stream `stream` from `base` (SplitMix64 finalizer).
pub fn child_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used for every seeded stream in this crate.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// `n` i.i.d. draws from `density`.
pub fn sample_n<S: Sampler>(density: &S, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample size", "must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..n).map(|_| density.sample(&mut rng)).collect())
}

/// Draws `n` labelled observations: label B with probability `w_B`, else A,
/// then `x` from the labelled density. Deterministic in `seed`.
pub fn sample_mixture<S: Sampler>(
    priors: PriorPair,
    d_a: &S,
    d_b: &S,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(Error::invalid("sample size", "must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    let w_b = priors.w_b();
    Ok((0..n)
        .map(|_| {
            let label = if rng.random::<f64>() < w_b { Event::B } else { Event::A };
            let x = match label {
                Event::A => d_a.sample(&mut rng),
                Event::B => d_b.sample(&mut rng),
            };
            LabeledSample { x, label }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use proptest::prelude::*;

    fn n(m: f64, s: f64) -> GaussianDensity {
        GaussianDensity::new(m, s).unwrap()
    }

    #[test]
    fn gaussian_validation() {
        assert!(GaussianDensity::new(0.0, 0.0).is_err());
        assert!(GaussianDensity::new(0.0, -1.0).is_err());
        assert!(GaussianDensity::new(f64::NAN, 1.0).is_err());
        assert!(n(0.0, 1.0).density(f64::INFINITY).is_err());
        assert!(n(0.0, 1.0).log_density(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_values() {
        assert!((n(0.0, 1.0).density(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((n(0.35, 0.1).density(0.35).unwrap() - 3.989_422_804_014_327).abs() < 1e-14);
        // mpmath: exp(-0.5·(0.5/0.126)²)/(0.126·√(2π))
        let v = n(0.0, 0.126).density(0.5).unwrap();
        assert!((v - 1.205_350_431_909_032e-3).abs() < 1e-17, "{v}");
    }

    #[test]
    fn density_integrates_to_one() {
        for d in [n(0.0, 1.0), n(0.0, 0.126), n(0.5, 0.1), n(-3.0, 7.5)] {
            let (lo, hi) = d.support();
            let mass = simpson(|x| d.pdf(x), lo, hi, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{d}: {mass}");
        }
    }

    #[test]
    fn priors() {
        assert!(PriorPair::new(0.5, 0.6).is_err());
        assert!(PriorPair::new(1.0, 0.0).is_err());
        assert!(PriorPair::new(0.999, 0.001).is_ok());
        let p = PriorPair::from_log10_ratio(3.0).unwrap();
        assert!((p.w_b() - 1.0 / 1001.0).abs() < 1e-18);
        assert!((p.log10_ratio() - 3.0).abs() < 1e-12);
        let eq = PriorPair::from_log10_ratio(0.0).unwrap();
        assert_eq!(eq.w_a(), 0.5);
    }

    #[test]
    fn mixture_errors_and_determinism() {
        let pr = PriorPair::new(0.5, 0.5).unwrap();
        let d = n(0.0, 1.0);
        assert!(sample_mixture(pr, &d, &d, 0, 1).is_err());
        let a = sample_mixture(pr, &d, &d, 500, 42).unwrap();
        let b = sample_mixture(pr, &d, &d, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_mixture(pr, &d, &d, 500, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn balanced_mixture_counts() {
        let pr = PriorPair::new(0.5, 0.5).unwrap();
        let d = n(0.0, 1.0);
        let s = sample_mixture(pr, &d, &d, 1000, 7).unwrap();
        let b = s.iter().filter(|s| s.label == Event::B).count() as f64;
        // σ = √(1000·0.25)
        assert!((b - 500.0).abs() < 5.0 * 250f64.sqrt(), "{b}");
    }

    #[test]
    fn rare_mixture_counts() {
        let pr = PriorPair::new(0.999, 0.001).unwrap();
        let s = sample_mixture(pr, &n(0.0, 0.126), &n(0.5, 0.1), 1_000_000, 11).unwrap();
        let b = s.iter().filter(|s| s.label == Event::B).count() as f64;
        let sigma = (1e6f64 * 0.001 * 0.999).sqrt();
        assert!((b - 1000.0).abs() < 5.0 * sigma, "{b}");
    }

    // tight Simpson integral of the pdf as the CDF reference
    fn std_normal_cdf(x: f64) -> f64 {
        let d = n(0.0, 1.0);
        if x <= 0.0 {
            simpson(|t| d.pdf(t), -12.0, x.max(-12.0), 1e-13).unwrap()
        } else {
            1.0 - simpson(|t| d.pdf(t), x, 12.0_f64.max(x), 1e-13).unwrap()
        }
    }

    #[test]
    fn sampler_matches_cdf() {
        let mut xs = sample_n(&n(0.0, 1.0), 100_000, 2024).unwrap();
        xs.sort_by(f64::total_cmp);
        let len = xs.len() as f64;
        // evaluate the analytic CDF on a grid and compare with the empirical one
        let mut sup: f64 = 0.0;
        for k in 0..=400 {
            let t = -4.0 + 8.0 * k as f64 / 400.0;
            let emp = xs.partition_point(|&v| v <= t) as f64 / len;
            sup = sup.max((emp - std_normal_cdf(t)).abs());
        }
        assert!(sup < 1.95 / len.sqrt(), "sup gap {sup}");
    }

    #[test]
    fn child_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| child_seed(99, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(child_seed(5, 3), child_seed(5, 3));
    }

    proptest! {
        #[test]
        fn log_density_consistent(m in -5.0f64..5.0, s in 0.01f64..10.0, x in -50.0f64..50.0) {
            let d = n(m, s);
            let p = d.pdf(x);
            prop_assume!(p > 1e-300);
            let via_log = d.ln_pdf(x).exp();
            prop_assert!((via_log - p).abs() <= 1e-12 * p);
        }
    }
}
