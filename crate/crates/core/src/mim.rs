//! Message importance measure and the minor-probability magnifier.
//!
//! The magnifier `f(p) = p·e^{-wp}` rises on `[0, 1/w]` and falls on
//! `[1/w, ∞)`, so every `p` below `1/w` has a unique partner `p·(1+q)` above
//! it with the same importance. The relative lift `q` is the magnifying
//! ratio; it solves `ln(1+q)/(w·q) = p`, whose left side decreases strictly
//! in `q`, so a bracketing bisection always converges.

use crate::error::{Error, Result};

/// Cap shared by bracket expansion and bisection in the ratio solver.
pub const MAX_SOLVER_ITERATIONS: usize = 200;

/// Tolerance on the sum of a discrete distribution.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

/// Positive importance coefficient (`w`, or the calibrated `s0` in a detector).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ImportanceCoeff(f64);

impl ImportanceCoeff {
    pub fn new(w: f64) -> Result<Self> {
        if w.is_finite() && w > 0.0 {
            Ok(Self(w))
        } else {
            Err(Error::invalid(
                "importance coefficient",
                format!("must be finite and > 0, got {w}"),
            ))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Location of the magnifier's maximum, `1/w`.
    #[inline]
    pub fn peak(self) -> f64 {
        1.0 / self.0
    }
}

/// Probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("distribution", "no outcomes"));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid("distribution", format!("entry {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOL {
            return Err(Error::invalid("distribution", format!("sums to {sum}, expected 1")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Magnifying ratio `q > 0` relating a small probability to its partner.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MagnifyingRatio(f64);

impl MagnifyingRatio {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(Self(q))
        } else {
            Err(Error::invalid(
                "magnifying ratio",
                format!("must be finite and > 0, got {q}"),
            ))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// The partner probability `p·(1+q)` for the `p` this ratio was solved at.
    #[inline]
    pub fn partner_of(self, p: f64) -> f64 {
        p * (1.0 + self.0)
    }
}

/// `L(p, w) = ln Σ p_i·exp(w·(1 − p_i))`, evaluated as a log-sum-exp.
///
/// Zero-probability outcomes contribute nothing. The result lies in `[0, w]`.
pub fn mim_discrete(dist: &DiscreteDistribution, w: ImportanceCoeff) -> f64 {
    let w = w.get();
    let terms: Vec<f64> = dist
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.ln() + w * (1.0 - p))
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// The magnifier `p·e^{-w·p}` for a probability or density value `p ≥ 0`.
pub fn magnify(p: f64, w: ImportanceCoeff) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::invalid(
            "magnifier argument",
            format!("must be finite and >= 0, got {p}"),
        ));
    }
    Ok(magnify_unchecked(p, w.get()))
}

#[inline]
pub(crate) fn magnify_unchecked(p: f64, w: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (-w * p).exp()
    }
}

/// `ln(p·e^{-w·p})` from `ln p`; finite wherever `ln p` is.
#[inline]
pub(crate) fn ln_magnify(ln_p: f64, w: f64) -> f64 {
    ln_p - w * ln_p.exp()
}

/// Inverse of the magnifier's partner map: `p = ln(1+q)/(w·q)`.
#[inline]
pub fn probability_for_ratio(q: MagnifyingRatio, w: ImportanceCoeff) -> f64 {
    let q = q.get();
    q.ln_1p() / (w.get() * q)
}

/// Finds `q > 0` with `|ln(1+q)/(w·q) − p| ≤ tol·p`.
///
/// Requires `0 < p < 1/w`. The bracket grows by doubling (or shrinks by
/// halving) from `q = 1`, then bisection narrows it. If the bracket collapses
/// to adjacent floats before the tolerance is met, the midpoint is returned,
/// since no representable `q` does better.
pub fn solve_magnifying_ratio(p: f64, w: ImportanceCoeff, tol: f64) -> Result<MagnifyingRatio> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::invalid(
            "probability",
            format!("must be finite and > 0, got {p}"),
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(
            "tolerance",
            format!("must be finite and > 0, got {tol}"),
        ));
    }
    let wv = w.get();
    if p * wv >= 1.0 {
        return Err(Error::NoPartner { p, w: wv });
    }

    // Positive below the root, negative above it.
    let residual = |q: f64| q.ln_1p() / (wv * q) - p;

    let (mut lo, mut hi) = if residual(1.0) > 0.0 {
        let mut hi = 2.0;
        let mut steps = 0;
        while residual(hi) > 0.0 {
            hi *= 2.0;
            steps += 1;
            if steps >= MAX_SOLVER_ITERATIONS || !hi.is_finite() {
                return Err(Error::Convergence {
                    what: "magnifying-ratio bracket",
                    detail: format!("no upper bracket for p = {p:e}, w = {wv} after {steps} doublings"),
                });
            }
        }
        (hi / 2.0, hi)
    } else {
        let mut lo = 0.5;
        let mut steps = 0;
        while residual(lo) <= 0.0 {
            lo /= 2.0;
            steps += 1;
            if steps >= MAX_SOLVER_ITERATIONS || lo == 0.0 {
                return Err(Error::Convergence {
                    what: "magnifying-ratio bracket",
                    detail: format!("no lower bracket for p = {p:e}, w = {wv} after {steps} halvings"),
                });
            }
        }
        (lo, lo * 2.0)
    };

    let target = tol * p;
    for _ in 0..MAX_SOLVER_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= target || mid <= lo || mid >= hi {
            return MagnifyingRatio::new(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "magnifying-ratio bisection",
        detail: format!("bracket [{lo:e}, {hi:e}] after {MAX_SOLVER_ITERATIONS} iterations"),
    })
}
