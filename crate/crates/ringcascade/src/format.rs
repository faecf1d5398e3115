//! Deterministic number formatting for reproducible CSV/JSON artifacts.

/// Fixed 17-significant-digit scientific formatting. Two runs at the same
/// tolerances produce byte-identical files.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::fmt_float;

    #[test]
    fn roundtrips_exactly() {
        for v in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1e17, -7.0 / 3.0] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
