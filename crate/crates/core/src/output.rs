//! Number formatting shared by every CSV writer.

use crate::ext_real::ExtReal;

/// 17 significant digits, enough to round-trip any `f64`; `inf` for +∞.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_ext(v: ExtReal) -> String {
    match v {
        ExtReal::Finite(x) => fmt_f64(x),
        ExtReal::PosInf => "inf".to_string(),
    }
}

/// Semicolon-joined list, for list-valued CSV cells.
pub fn fmt_list<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}
