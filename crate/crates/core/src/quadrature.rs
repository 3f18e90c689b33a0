//! Composite Simpson quadrature with step halving, and decision-boundary
//! location for integrating over the regions of a piecewise-constant rule.

use crate::distributions::Event;
use crate::error::{Error, Result};

/// Panels in the first Simpson estimate.
pub const INITIAL_PANELS: usize = 128;

/// Halvings attempted before reporting non-convergence.
pub const MAX_HALVINGS: usize = 20;

/// Grid points used to scan for decision flips.
pub const BOUNDARY_SCAN_POINTS: usize = 4096;

/// Width at which boundary bisection stops.
pub const BOUNDARY_TOL: f64 = 1e-13;

/// Integrates `f` over `[a, b]` by composite Simpson, halving the step until
/// two successive estimates differ by less than `tol`.
///
/// Function values from coarser levels are reused, so each halving costs one
/// evaluation per new panel.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration range", format!("[{a}, {b}] is not finite")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(
            "tolerance",
            format!("must be finite and > 0, got {tol}"),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut panels = INITIAL_PANELS;
    let mut h = (hi - lo) / panels as f64;
    let ends = f(lo) + f(hi);
    let mut odd: f64 = (0..panels / 2).map(|i| f(lo + (2 * i + 1) as f64 * h)).sum();
    let mut even: f64 = (1..panels / 2).map(|i| f(lo + (2 * i) as f64 * h)).sum();
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);

    for _ in 0..MAX_HALVINGS {
        panels *= 2;
        h *= 0.5;
        even += odd;
        odd = (0..panels / 2).map(|i| f(lo + (2 * i + 1) as f64 * h)).sum();
        let refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        if !refined.is_finite() {
            return Err(Error::Convergence {
                what: "simpson quadrature",
                detail: format!("non-finite estimate on [{lo}, {hi}]"),
            });
        }
        if (refined - estimate).abs() < tol {
            return Ok(sign * refined);
        }
        estimate = refined;
    }
    Err(Error::Convergence {
        what: "simpson quadrature",
        detail: format!(
            "[{lo}, {hi}] after {MAX_HALVINGS} halvings, last two estimates {estimate:e} and {:e}",
            h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        ),
    })
}

/// A maximal interval on which a decision rule returns one verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub verdict: Event,
}

/// Splits `[lo, hi]` into regions of constant verdict.
///
/// A uniform scan finds sign changes; each is refined by bisection to
/// [`BOUNDARY_TOL`]. Regions narrower than one scan cell can be missed.
pub fn decision_regions<D: Fn(f64) -> Event>(decide: D, lo: f64, hi: f64) -> Vec<Region> {
    let step = (hi - lo) / BOUNDARY_SCAN_POINTS as f64;
    let at = |i: usize| {
        if i == BOUNDARY_SCAN_POINTS {
            hi
        } else {
            lo + i as f64 * step
        }
    };

    let mut regions = Vec::new();
    let mut start = lo;
    let mut prev = decide(lo);
    for i in 1..=BOUNDARY_SCAN_POINTS {
        let x = at(i);
        let cur = decide(x);
        if cur != prev {
            let edge = refine_boundary(&decide, at(i - 1), x, prev);
            regions.push(Region {
                lo: start,
                hi: edge,
                verdict: prev,
            });
            start = edge;
            prev = cur;
        }
    }
    regions.push(Region {
        lo: start,
        hi,
        verdict: prev,
    });
    regions
}

fn refine_boundary<D: Fn(f64) -> Event>(decide: &D, mut a: f64, mut b: f64, left: Event) -> f64 {
    while b - a > BOUNDARY_TOL * (1.0f64).max(a.abs().max(b.abs())) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if decide(mid) == left {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
