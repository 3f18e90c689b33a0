//! Miss / false-alarm rates by quadrature and by Monte Carlo, and the
//! Chernoff exponent of the underlying binary test.

use std::cell::Cell;

use crate::distributions::{union_support, Density, Event, LabeledSample, PriorPair};
use crate::error::{Error, Result};
use crate::quadrature::{decision_regions, simpson};

/// Densities below this are treated as zero inside KL integrands.
pub const KL_DENSITY_FLOOR: f64 = 1e-300;

/// Bisection cap for the Chernoff balance point.
pub const CHERNOFF_MAX_ITERATIONS: usize = 200;

/// Confusion matrix of one detector on a labelled dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub a_as_a: u64,
    pub a_as_b: u64,
    pub b_as_a: u64,
    pub b_as_b: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: Event, verdict: Event) {
        match (truth, verdict) {
            (Event::A, Event::A) => self.a_as_a += 1,
            (Event::A, Event::B) => self.a_as_b += 1,
            (Event::B, Event::A) => self.b_as_a += 1,
            (Event::B, Event::B) => self.b_as_b += 1,
        }
    }

    pub fn n_a(&self) -> u64 {
        self.a_as_a + self.a_as_b
    }

    pub fn n_b(&self) -> u64 {
        self.b_as_a + self.b_as_b
    }
}

/// Miss rate `alpha = P(decide A | B)`, false-alarm rate
/// `beta = P(decide B | A)` and overall error `pe = w_B·alpha + w_A·beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub alpha: f64,
    pub beta: f64,
    pub pe: f64,
    /// Present for empirical estimates.
    pub counts: Option<ConfusionCounts>,
}

impl ErrorRates {
    pub fn new(alpha: f64, beta: f64, priors: PriorPair) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("error rate", format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            pe: priors.w_b() * alpha + priors.w_a() * beta,
            counts: None,
        })
    }
}

/// Error rates of `decide` by integrating each hypothesis density over the
/// opposite decision region.
///
/// The range is the union of both support hints. Decision boundaries are
/// located first so no Simpson panel straddles a discontinuity; each region
/// is then integrated to `tol / regions`.
pub fn error_rates_quadrature<F, D>(decide: F, priors: PriorPair, d_a: &D, d_b: &D, tol: f64) -> Result<ErrorRates>
where
    F: Fn(f64) -> Event,
    D: Density,
{
    let (lo, hi) = union_support(d_a, d_b);
    let regions = decision_regions(&decide, lo, hi);
    let region_tol = tol / regions.len() as f64;
    let (mut alpha, mut beta) = (0.0, 0.0);
    for r in &regions {
        match r.verdict {
            Event::A => alpha += simpson(|x| d_b.pdf(x), r.lo, r.hi, region_tol)?,
            Event::B => beta += simpson(|x| d_a.pdf(x), r.lo, r.hi, region_tol)?,
        }
    }
    ErrorRates::new(alpha.clamp(0.0, 1.0), beta.clamp(0.0, 1.0), priors)
}

/// Empirical error rates of `decide` on labelled samples.
pub fn error_rates_monte_carlo<F>(decide: F, samples: &[LabeledSample], priors: PriorPair) -> Result<ErrorRates>
where
    F: Fn(f64) -> Event,
{
    let mut counts = ConfusionCounts::default();
    for s in samples {
        counts.record(s.label, decide(s.x));
    }
    if counts.n_b() == 0 {
        return Err(Error::UndefinedRate("miss rate needs at least one B sample".into()));
    }
    if counts.n_a() == 0 {
        return Err(Error::UndefinedRate(
            "false-alarm rate needs at least one A sample".into(),
        ));
    }
    let alpha = counts.b_as_a as f64 / counts.n_b() as f64;
    let beta = counts.a_as_b as f64 / counts.n_a() as f64;
    let mut rates = ErrorRates::new(alpha, beta, priors)?;
    rates.counts = Some(counts);
    Ok(rates)
}

/// The normalised geometric interpolation `p_A^λ·p_B^{1−λ} / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedDensity<D> {
    d_a: D,
    d_b: D,
    lambda: f64,
    ln_z: f64,
}

impl<D: Density> TiltedDensity<D> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ln Z`, the log normaliser.
    pub fn ln_normalizer(&self) -> f64 {
        self.ln_z
    }
}

fn ln_tilt<D: Density>(d_a: &D, d_b: &D, lambda: f64, x: f64) -> f64 {
    if lambda == 1.0 {
        d_a.ln_pdf(x)
    } else if lambda == 0.0 {
        d_b.ln_pdf(x)
    } else {
        lambda * d_a.ln_pdf(x) + (1.0 - lambda) * d_b.ln_pdf(x)
    }
}

impl<D: Density> Density for TiltedDensity<D> {
    fn ln_pdf(&self, x: f64) -> f64 {
        ln_tilt(&self.d_a, &self.d_b, self.lambda, x) - self.ln_z
    }

    fn support(&self) -> (f64, f64) {
        union_support(&self.d_a, &self.d_b)
    }
}

/// Builds the tilted density at `lambda`, normalising by quadrature.
pub fn tilted_distribution<D: Density + Clone>(d_a: &D, d_b: &D, lambda: f64, tol: f64) -> Result<TiltedDensity<D>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(
            "tilt parameter",
            format!("lambda = {lambda} is outside [0, 1]"),
        ));
    }
    let (lo, hi) = union_support(d_a, d_b);
    let z = simpson(|x| ln_tilt(d_a, d_b, lambda, x).exp(), lo, hi, tol)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Convergence {
            what: "tilted normaliser",
            detail: format!("Z = {z}"),
        });
    }
    Ok(TiltedDensity {
        d_a: d_a.clone(),
        d_b: d_b.clone(),
        lambda,
        ln_z: z.ln(),
    })
}

/// `D(p‖q) = ∫ p·(ln p − ln q)` in nats over `p`'s support.
pub fn kl_divergence(p: &impl Density, q: &impl Density, tol: f64) -> Result<f64> {
    let ln_floor = KL_DENSITY_FLOOR.ln();
    let infinite_at: Cell<Option<(f64, f64)>> = Cell::new(None);
    let (lo, hi) = p.support();
    let value = simpson(
        |x| {
            let lp = p.ln_pdf(x);
            if lp < ln_floor {
                return 0.0;
            }
            let lq = q.ln_pdf(x);
            if lq == f64::NEG_INFINITY {
                infinite_at.set(Some((x, lp.exp())));
                return 0.0;
            }
            lp.exp() * (lp - lq)
        },
        lo,
        hi,
        tol,
    );
    if let Some((x, p)) = infinite_at.get() {
        return Err(Error::InfiniteDivergence { x, p });
    }
    Ok(value?.max(0.0))
}

/// Balance point of the Chernoff tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffResult {
    pub lambda_star: f64,
    /// `D(p_λ*‖p_A)`, the Chernoff exponent in nats.
    pub d_star: f64,
    pub d_to_a: f64,
    pub d_to_b: f64,
    /// Set when the densities are indistinguishable (`D* = 0`).
    pub degenerate: bool,
}

/// Finds `λ*` with `D(p_λ*‖p_A) = D(p_λ*‖p_B)` by bisection to `|h| ≤ tol`.
///
/// `h(λ) = D(p_λ‖p_A) − D(p_λ‖p_B)` runs from `D(p_B‖p_A) > 0` at `λ = 0` to
/// `−D(p_A‖p_B) < 0` at `λ = 1`. Inner integrals use `tol / 100`.
pub fn chernoff_exponent<D: Density + Clone>(d_a: &D, d_b: &D, tol: f64) -> Result<ChernoffResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(
            "tolerance",
            format!("must be finite and > 0, got {tol}"),
        ));
    }
    let inner = tol * 1e-2;
    let h_at_0 = kl_divergence(d_b, d_a, inner)?;
    let h_at_1 = -kl_divergence(d_a, d_b, inner)?;
    if h_at_0 <= tol || h_at_1 >= -tol {
        return Ok(ChernoffResult {
            lambda_star: 0.5,
            d_star: 0.0,
            d_to_a: 0.0,
            d_to_b: 0.0,
            degenerate: true,
        });
    }

    let balance = |lambda: f64| -> Result<(f64, f64)> {
        let tilt = tilted_distribution(d_a, d_b, lambda, inner)?;
        Ok((kl_divergence(&tilt, d_a, inner)?, kl_divergence(&tilt, d_b, inner)?))
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..CHERNOFF_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let (to_a, to_b) = balance(mid)?;
        let h = to_a - to_b;
        if h.abs() <= tol || hi - lo <= f64::EPSILON {
            return Ok(ChernoffResult {
                lambda_star: mid,
                d_star: to_a,
                d_to_a: to_a,
                d_to_b: to_b,
                degenerate: false,
            });
        }
        if h > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "chernoff bisection",
        detail: format!("bracket [{lo}, {hi}] after {CHERNOFF_MAX_ITERATIONS} iterations"),
    })
}
