//! Closed-form rate functions and `G` for the constant, symmetric dichotomous
//! and uniform field laws. These serve as oracles for the numerical pipeline.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::field_models::FieldModel;
use crate::phase_diagram::find_global_minima;
use crate::rate_function::RateFunction;

/// Cramér entropy of a fair ±1 coin:
/// `I₀(x) = ((1+x)/2) ln(1+x) + ((1-x)/2) ln(1-x)`, `ln 2` at `|x| = 1`.
pub fn cramer_entropy(x: f64) -> ExtReal {
    let ax = x.abs();
    if ax > 1.0 || x.is_nan() {
        ExtReal::PosInf
    } else if ax == 1.0 {
        ExtReal::Finite(LN_2)
    } else {
        ExtReal::Finite(0.5 * (1.0 + x) * x.ln_1p() + 0.5 * (1.0 - x) * (-x).ln_1p())
    }
}

/// `inf G` for `model` at `β`, from the phase-diagram minimizer.
fn inf_g(model: FieldModel, beta: f64) -> Result<f64> {
    let rf = RateFunction::new(model, beta)?;
    let minima = find_global_minima(&rf, 1e-14)?;
    minima.iter().map(|m| m.value).reduce(f64::min).ok_or_else(|| Error::Unclassified("no global minimum of G".into()))
}

/// Classical Curie-Weiss rate function
/// `I(x) = -βx²/2 - βhx + I₀(x) - inf_y {-βy²/2 - βhy + I₀(y)}`.
pub fn classical_rate(x: f64, beta: f64, h: f64) -> Result<ExtReal> {
    let inf = inf_g(FieldModel::constant(h)?, beta)?;
    Ok(cramer_entropy(x).minus(0.5 * beta * x * x + beta * h * x + inf))
}

/// Rate function for fields `±h` with probability 1/2 each.
pub fn dichotomous_rate(x: f64, beta: f64, h: f64) -> Result<ExtReal> {
    let ax = x.abs();
    if ax > 1.0 || x.is_nan() {
        return Ok(ExtReal::PosInf);
    }
    let inf = inf_g(FieldModel::dichotomous(h.abs(), 0.5)?, beta)?;
    if ax == 1.0 {
        return Ok(ExtReal::Finite(LN_2 - 0.5 * beta - inf));
    }
    Ok(ExtReal::Finite(dichotomous_conjugate(x, beta, h) - 0.5 * beta * x * x - inf))
}

/// `f*(x)` for the symmetric dichotomous law, `|x| < 1`, with
/// `a = sinh(2βh)`, `b = cosh(2βh)`.
pub fn dichotomous_conjugate(x: f64, beta: f64, h: f64) -> f64 {
    let a = (2.0 * beta * h).sinh();
    let b = (2.0 * beta * h).cosh();
    let root = (1.0 + x * x * a * a).sqrt();
    let one_minus_x2 = (1.0 - x) * (1.0 + x);
    LN_2 + 0.5 * x * (x / one_minus_x2 * (b + root)).asinh() + 0.5 * (one_minus_x2 / 2.0).ln() - 0.5 * (b + root).ln()
}

/// Power series `Σ zⁿ/n²` for `|z| <= 1/2`, stopped once the geometric tail
/// bound `|z|^{N+1}/(N+1)² / (1-|z|)` drops below `1e-17`.
fn dilog_series(z: f64) -> f64 {
    let az = z.abs();
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut n = 1u32;
    loop {
        power *= z;
        let nf = f64::from(n);
        sum += power / (nf * nf);
        let next = f64::from(n + 1);
        let tail = az.powi(n as i32 + 1) / (next * next) / (1.0 - az);
        if tail < 1e-17 || power == 0.0 {
            return sum;
        }
        n += 1;
    }
}

/// The dilogarithm `Li₂(z) = Σ_{n>=1} zⁿ/n²` on `[-1, 1]`.
///
/// Direct summation for `|z| <= 1/2`; the reflection `Li₂(z) = π²/6 -
/// ln z ln(1-z) - Li₂(1-z)` for `z > 1/2`; the Landen identity
/// `Li₂(z) = -Li₂(z/(z-1)) - ln²(1-z)/2` for `z < -1/2`.
pub fn dilog(z: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::DilogDomain(z));
    }
    Ok(if z == 1.0 {
        PI * PI / 6.0
    } else if z > 0.5 {
        PI * PI / 6.0 - z.ln() * (-z).ln_1p() - dilog_series(1.0 - z)
    } else if z < -0.5 {
        let l = (-z).ln_1p();
        -dilog_series(z / (z - 1.0)) - 0.5 * l * l
    } else {
        dilog_series(z)
    })
}

/// `G(x)` for fields uniform on `[-h, h]`, through the dilogarithm
/// antiderivative of `ln cosh`.
pub fn uniform_g(x: f64, beta: f64, h: f64) -> Result<f64> {
    let ax = x.abs();
    let bh4 = 4.0 * beta * h;
    let li = |t: f64| dilog(-(-2.0 * beta * t).exp());
    let tail = if ax <= h {
        -beta / (2.0 * h) * (x * x + h * h) - PI * PI / (6.0 * bh4) - li(h - ax)? / bh4
    } else {
        -beta * ax + li(ax - h)? / bh4
    };
    Ok(LN_2 + 0.5 * beta * x * x - li(h + ax)? / bh4 + tail)
}
