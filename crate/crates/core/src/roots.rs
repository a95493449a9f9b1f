//! Bracketing root finders for monotone scalar functions.

use crate::error::{Error, Result};

/// Maximum iterations for any bracketing search.
pub const MAX_ITER: usize = 200;

/// Finds `x` in `[lo, hi]` with `f(x) = 0` by bisection, assuming `f(lo)` and
/// `f(hi)` have opposite signs (or one of them vanishes).
///
/// Stops once the bracket is narrower than `tol * max(1, |x|)` or no longer
/// representable.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Convergence(format!(
            "root not bracketed on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(format!(
        "bisection did not converge within {MAX_ITER} iterations on [{lo}, {hi}]"
    )))
}

/// Solves `g(x) = target` for a non-decreasing `g` on the real line, growing
/// the initial bracket `[lo, hi]` geometrically until it encloses the target.
pub fn invert_increasing<F>(mut g: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut width = (hi - lo).max(1.0);
    let mut grown = 0;
    while g(lo)? > target {
        lo -= width;
        width *= 2.0;
        grown += 1;
        if grown > 60 || !lo.is_finite() {
            return Err(Error::Convergence(format!("cannot bracket {target} from below")));
        }
    }
    while g(hi)? < target {
        hi += width;
        width *= 2.0;
        grown += 1;
        if grown > 60 || !hi.is_finite() {
            return Err(Error::Convergence(format!("cannot bracket {target} from above")));
        }
    }
    bisect(|x| Ok(g(x)? - target), lo, hi, tol)
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..MAX_ITER {
        if (hi - lo) <= tol * x1.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
