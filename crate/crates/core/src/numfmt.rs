//! Canonical numeric formatting shared by exports and the CLI.
//!
//! All human-readable numeric output is fixed to 6 significant digits.
//! The formatter is idempotent under a parse/format round trip, which
//! keeps exported documents byte-stable.

/// Format `x` to 6 significant digits.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

/// Format `x` to `digits` significant digits, trimming trailing zeros.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits > 0);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-18..=18).contains(&exp) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = digits as i32 - 1 - exp;
    if decimals < 0 {
        // Integer wider than the requested precision: round to a power of ten.
        let p = 10f64.powi(-decimals);
        return format!("{:.0}", (x / p).round() * p);
    }
    trim_trailing_zeros(format!("{x:.0$}", decimals as usize))
}

/// `x` rounded to 6 significant digits, as a value (used for JSON output).
pub fn round_sig6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

fn trim_trailing_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_rounding() {
        assert_eq!(sig6(1.3558873), "1.35589");
        assert_eq!(sig6(252.81562), "252.816");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(90.3), "90.3");
        assert_eq!(sig6(280.0), "280");
        assert_eq!(sig6(-0.0123456749), "-0.0123457");
    }

    #[test]
    fn wide_integers_are_rounded() {
        assert_eq!(sig6(1234567.0), "1234570");
        assert_eq!(sig6(999999.7), "1000000");
    }

    #[test]
    fn idempotent_under_round_trip() {
        for &x in &[
            1.3558873, 252.81562, 90.3, 0.05, 1.5, 21.5, 11.35, 5.22, 1e-7, 1234567.89, 0.001,
            100.0, 6899.7248,
        ] {
            let s1 = sig6(x);
            let y: f64 = s1.parse().unwrap();
            assert_eq!(sig6(y), s1, "not idempotent for {x}");
        }
    }
}
