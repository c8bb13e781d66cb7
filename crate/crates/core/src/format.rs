//! Number formatting helpers for reports.

/// Formats `x` with `digits` significant digits, keeping trailing zeros
/// (`23.52` at 6 digits is `23.5200`, `0` at 4 digits is `0.000`).
pub fn significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let mut decimals = decimals_for(x.abs(), digits);
    // rounding can carry into a new leading digit, e.g. 9.99996 -> 10.0000
    let rounded: f64 = format!("{:.*}", decimals, x).parse().unwrap_or(x);
    if rounded != 0.0 {
        decimals = decimals_for(rounded.abs(), digits);
    }
    let s = format!("{:.*}", decimals, x);
    if decimals == 0 && rounded.abs() >= 10f64.powi(digits as i32) {
        // too large for fixed notation at this precision
        return format!("{:.*e}", digits - 1, x);
    }
    s
}

/// As [`significant`] with trailing fractional zeros removed (`0.2`, `2`).
pub fn compact(x: f64, digits: usize) -> String {
    let s = significant(x, digits);
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn decimals_for(abs: f64, digits: usize) -> usize {
    let exp = abs.log10().floor() as i64;
    (digits as i64 - 1 - exp).max(0) as usize
}
