//! Legendre-Fenchel conjugation of the limiting free energy.
//!
//! `f` is smooth and strictly convex with `f'` increasing onto a subinterval
//! of `(-1, 1)`, so for `|x| < 1` the supremum in `f*(x) = sup_y {xy - f(y)}`
//! is attained at the unique root of `f'(y) = x`.

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::field_models::FreeEnergy;
use crate::numerics::roots::newton_bisect;

/// `|y|` beyond which `cosh` would overflow; the bracket search stops here.
pub const BRACKET_CAP: f64 = 700.0;
const DEFAULT_ROOT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 400;

/// Convex conjugate of a [`FreeEnergy`], together with the derived log-MGF
/// `Λ(x) = f(x) - f(0)` and the product-measure rate `R(x) = f*(x) + f(0)`.
#[derive(Debug, Clone)]
pub struct Conjugate {
    fe: FreeEnergy,
    root_tol: f64,
}

impl Conjugate {
    pub fn new(fe: FreeEnergy) -> Self {
        Conjugate { fe, root_tol: DEFAULT_ROOT_TOL }
    }

    pub fn with_root_tol(mut self, root_tol: f64) -> Self {
        self.root_tol = root_tol;
        self
    }

    pub fn free_energy(&self) -> &FreeEnergy {
        &self.fe
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    /// Smallest bracket `[-2^k, 2^k]` (capped at [`BRACKET_CAP`]) on which
    /// `f' - x` changes sign.
    pub fn bracket(&self, x: f64) -> (f64, f64) {
        let mut width = 1.0f64;
        loop {
            let lo = self.fe.derivative(-width);
            let hi = self.fe.derivative(width);
            if (lo <= x && x <= hi) || width >= BRACKET_CAP {
                return (-width, width);
            }
            width = (2.0 * width).min(BRACKET_CAP);
        }
    }

    /// The maximizer `y*` with `f'(y*) = x`, for `|x| < 1`.
    pub fn maximizer(&self, x: f64) -> Result<f64> {
        debug_assert!(x.abs() < 1.0);
        let (lo, hi) = self.bracket(x);
        if self.fe.derivative(hi) < x {
            return Ok(hi);
        }
        if self.fe.derivative(lo) > x {
            return Ok(lo);
        }
        newton_bisect(|y| (self.fe.derivative(y) - x, self.fe.second_derivative(y)), lo, hi, self.root_tol, MAX_ITER)
    }

    /// `f*(±1) = ln 2 ∓ β E[h]`, the limit of `f*` at the cube boundary.
    pub fn boundary_value(&self, sign: f64) -> f64 {
        LN_2 - sign * self.fe.beta() * self.fe.mean_field()
    }

    /// `f*(x)`; `+inf` for `|x| > 1`.
    pub fn conjugate(&self, x: f64) -> Result<ExtReal> {
        let ax = x.abs();
        if ax > 1.0 || x.is_nan() {
            return Ok(ExtReal::PosInf);
        }
        if ax == 1.0 {
            return Ok(ExtReal::Finite(self.boundary_value(x.signum())));
        }
        let y = self.maximizer(x)?;
        Ok(ExtReal::Finite(x * y - self.fe.value(y)))
    }

    /// `Λ(x) = f(x) - f(0)`.
    pub fn log_mgf(&self, x: f64) -> f64 {
        self.fe.value(x) - self.fe.value(0.0)
    }

    /// `R(x) = f*(x) + f(0)`.
    pub fn product_rate(&self, x: f64) -> Result<ExtReal> {
        Ok(self.conjugate(x)?.plus(self.fe.value(0.0)))
    }

    /// `f**(x) = sup_{|s| <= 1} {xs - f*(s)}` by golden-section search on the
    /// concave objective. Should reproduce `f(x)`.
    pub fn biconjugate_check(&self, x: f64) -> Result<f64> {
        let objective = |s: f64| -> Result<f64> { Ok(x * s - self.conjugate(s)?.unwrap_finite()) };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (-1.0f64, 1.0f64);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = objective(c)?;
        let mut fd = objective(d)?;
        while b - a > 1e-11 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective(d)?;
            }
        }
        let best = [objective(a)?, objective(b)?, fc, fd].into_iter().fold(f64::NEG_INFINITY, f64::max);
        Ok(best)
    }
}
