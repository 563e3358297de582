//! Extended reals `(-inf, +inf]` as they appear in conjugates and rate functions.

use std::cmp::Ordering;
use std::fmt;

/// A real number or `+inf`. The infinite value is an explicit variant, never
/// the result of an overflowing `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Panics on `+inf`; for call sites that have already excluded it.
    pub fn unwrap_finite(self) -> f64 {
        self.finite().expect("extended real is +inf")
    }

    /// Maps to `f64`, with `+inf` becoming `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn plus(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v + rhs),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    pub fn minus(self, rhs: f64) -> ExtReal {
        self.plus(-rhs)
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::Finite(v)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_finite_arithmetic() {
        assert_eq!(ExtReal::PosInf.minus(1e300), ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(2.0).minus(0.5), ExtReal::Finite(1.5));
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(f64::MAX) < ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.min(ExtReal::Finite(3.0)), ExtReal::Finite(3.0));
        assert_eq!(ExtReal::PosInf.to_string(), "inf");
    }
}
