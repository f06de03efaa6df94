//! Scalar numerics: principal-branch Lambert W, golden-section minimization
//! and a bracketing root finder for increasing functions.
//!
//! Every solver takes an explicit [`ToleranceSpec`] so results do not depend
//! on hidden defaults.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `-1/e`, the branch point of `W_0`.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// Width of the neighbourhood above the branch point where the series
/// expansion is used instead of Halley iteration.
const BRANCH_SERIES_WIDTH: f64 = 1e-6;

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("argument {0} outside the domain of W_0 (x >= -1/e)")]
    Domain(f64),
    #[error("{what} did not converge within {max_iter} iterations")]
    NoConvergence { what: &'static str, max_iter: usize },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("could not bracket target {target} after {max_iter} expansions")]
    BracketExpansion { target: f64, max_iter: usize },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Absolute/relative tolerances and an iteration cap shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl ToleranceSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(NumericsError::InvalidTolerance("abs_tol must be > 0"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(NumericsError::InvalidTolerance("rel_tol must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(NumericsError::InvalidTolerance("max_iter must be >= 1"));
        }
        Ok(())
    }

    /// `max(abs_tol, rel_tol * |scale|)`
    #[inline]
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

/// Principal branch `W_0(x)` of the Lambert W function.
///
/// Uses the series in `p = sqrt(2(ex + 1))` inside a `1e-6` neighbourhood of
/// the branch point and Halley iteration elsewhere. The returned value
/// satisfies `|w e^w - x| <= max(abs_tol, rel_tol |x|)` and `w >= -1`.
pub fn lambert_w0(x: f64, tol: &ToleranceSpec) -> Result<f64> {
    tol.validate()?;
    if !x.is_finite() || x < BRANCH_POINT - tol.abs_tol {
        return Err(NumericsError::Domain(x));
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let offset = E * x + 1.0;
    if x - BRANCH_POINT <= BRANCH_SERIES_WIDTH {
        return Ok(branch_series(offset.max(0.0)));
    }

    let mut w = initial_guess(x, offset);
    let mut converged = false;
    for _ in 0..tol.max_iter {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            converged = true;
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = (w - step).max(-1.0);
        let moved = (next - w).abs();
        w = next;
        if moved <= 4.0 * f64::EPSILON * w.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let residual = (w * w.exp() - x).abs();
    if residual <= tol.threshold(x) {
        Ok(w)
    } else if converged {
        // Stalled at machine precision; accept only if within the relaxed
        // floating-point floor of the product.
        if residual <= 8.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            Ok(w)
        } else {
            Err(NumericsError::NoConvergence {
                what: "lambert_w0",
                max_iter: tol.max_iter,
            })
        }
    } else {
        Err(NumericsError::NoConvergence {
            what: "lambert_w0",
            max_iter: tol.max_iter,
        })
    }
}

/// Series of `W_0` about the branch point in `p = sqrt(2 (e x + 1))`.
fn branch_series(offset: f64) -> f64 {
    let p = (2.0 * offset).sqrt();
    let p2 = p * p;
    -1.0 + p - p2 / 3.0 + 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2 + 769.0 / 17280.0 * p2 * p2 * p
        - 221.0 / 8505.0 * p2 * p2 * p2
}

fn initial_guess(x: f64, offset: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * offset).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        // Pade-like start, good enough for a couple of Halley steps.
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Terminates once the bracket is narrower than
/// `2 max(abs_tol, rel_tol |x|)`. Endpoint values are compared against the
/// interior estimate so boundary minima are returned exactly.
pub fn minimize_unimodal<F>(f: F, lo: f64, hi: f64, tol: &ToleranceSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > 2.0 * tol.threshold(0.5 * (a + b)) {
        if iter == tol.max_iter {
            return Err(NumericsError::NoConvergence {
                what: "minimize_unimodal",
                max_iter: tol.max_iter,
            });
        }
        iter += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }

    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Finds `x` with `f(x) = target` for strictly increasing `f`.
///
/// The bracket is grown geometrically (step doubling) outwards from
/// `lo_hint`, then refined with bisection guarded by a secant step.
pub fn solve_increasing<F>(f: F, target: f64, lo_hint: f64, tol: &ToleranceSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    if !target.is_finite() || !lo_hint.is_finite() {
        return Err(NumericsError::BracketExpansion { target, max_iter: 0 });
    }
    let accept = tol.threshold(target);

    let f0 = f(lo_hint) - target;
    if f0.abs() <= accept {
        return Ok(lo_hint);
    }
    let mut step = lo_hint.abs().max(1.0);
    let (mut lo, mut hi, mut flo, mut fhi);
    if f0 < 0.0 {
        lo = lo_hint;
        flo = f0;
        let mut expansions = 0;
        loop {
            hi = lo_hint + step;
            fhi = f(hi) - target;
            if fhi >= 0.0 {
                break;
            }
            lo = hi;
            flo = fhi;
            expansions += 1;
            step *= 2.0;
            if expansions >= tol.max_iter || !hi.is_finite() {
                return Err(NumericsError::BracketExpansion {
                    target,
                    max_iter: tol.max_iter,
                });
            }
        }
    } else {
        hi = lo_hint;
        fhi = f0;
        let mut expansions = 0;
        loop {
            lo = lo_hint - step;
            flo = f(lo) - target;
            if flo <= 0.0 {
                break;
            }
            hi = lo;
            fhi = flo;
            expansions += 1;
            step *= 2.0;
            if expansions >= tol.max_iter || !lo.is_finite() {
                return Err(NumericsError::BracketExpansion {
                    target,
                    max_iter: tol.max_iter,
                });
            }
        }
    }
    if flo.abs() <= accept {
        return Ok(lo);
    }
    if fhi.abs() <= accept {
        return Ok(hi);
    }

    // Illinois-modified regula falsi keeps the bracket while converging
    // superlinearly on smooth functions.
    let mut side = 0i8;
    for _ in 0..tol.max_iter {
        let mut x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x) - target;
        if fx.abs() <= accept {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Err(NumericsError::NoConvergence {
        what: "solve_increasing",
        max_iter: tol.max_iter,
    })
}
