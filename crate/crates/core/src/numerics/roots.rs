//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with a sign change.
///
/// `fdf` returns `(f(x), f'(x))`. A Newton step that leaves the current
/// bracket, or fails to halve it, is replaced by bisection. Stops when the
/// bracket is narrower than `x_tol * max(1, |x|)`, a step falls below that
/// size, or `f(x) == 0`.
pub fn newton_bisect<F>(fdf: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BadBracket { lo: a, hi: b });
    }
    // orient so that f(a) < 0 < f(b) in the update rule below
    let increasing = fa < 0.0;

    let mut x = 0.5 * (a + b);
    let mut last_width = b - a;
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == increasing {
            a = x;
        } else {
            b = x;
        }
        let width = b - a;
        let tol = x_tol * x.abs().max(1.0);
        if width <= tol {
            return Ok(0.5 * (a + b));
        }
        let newton = x - fx / dfx;
        let use_newton = dfx.is_finite() && dfx != 0.0 && newton > a && newton < b && width < 0.5 * last_width + tol;
        let next = if use_newton { newton } else { 0.5 * (a + b) };
        last_width = width;
        if (next - x).abs() <= 0.5 * tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence { iterations: max_iter, lo: a, hi: b })
}

/// Plain bisection on a boolean predicate that is `false` at `lo` and `true`
/// at `hi`. Returns the final `(lo, hi)` with `hi - lo <= tol`.
pub fn bisect_predicate<P>(mut pred: P, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    P: FnMut(f64) -> bool,
{
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if pred(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a, b)
}
