//! Scalar numerical kernels shared by the model code.

pub mod quadrature;
pub mod roots;

use std::f64::consts::LN_2;

/// `ln cosh t`, stable for all finite `t`.
///
/// Uses `|t| + ln(1 + e^{-2|t|}) - ln 2`, which never overflows.
#[inline]
pub fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln(1 + e^t)`.
#[inline]
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// The `k`-th derivative of `ln cosh` at `t`, for `k` in `0..=6`.
///
/// For `k >= 1` the derivative is a polynomial in `tanh t`:
/// `D^{k+1} = p_k'(T) (1 - T^2)` with `p_1(T) = T`.
pub fn ln_cosh_derivative(k: usize, t: f64) -> f64 {
    if k == 0 {
        return ln_cosh(t);
    }
    let th = t.tanh();
    let t2 = th * th;
    match k {
        1 => th,
        // 1 - tanh^2 loses digits for large |t|; use sech^2 directly
        2 => {
            let s = sech(t);
            s * s
        }
        3 => -2.0 * th * sech2(t),
        4 => sech2(t) * (6.0 * t2 - 2.0),
        5 => sech2(t) * th * (16.0 - 24.0 * t2),
        6 => sech2(t) * (16.0 + t2 * (-120.0 + 120.0 * t2)),
        _ => panic!("ln cosh derivative of order {k} not supported"),
    }
}

#[inline]
fn sech(t: f64) -> f64 {
    let a = t.abs();
    if a > 700.0 {
        return 2.0 * (-a).exp();
    }
    1.0 / a.cosh()
}

#[inline]
fn sech2(t: f64) -> f64 {
    let s = sech(t);
    s * s
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{v_i}`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Median of a non-empty sample (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            // weighted form keeps grids on [-a, a] exactly antisymmetric
            let d = (n - 1) as f64;
            (0..n).map(|i| ((n - 1 - i) as f64 * lo + i as f64 * hi) / d).collect()
        }
    }
}
