//! Pinned numeric formatting for every emitted table.
//!
//! Values are rounded to 6 significant digits and then printed with the
//! shortest representation that round-trips the rounded value. `-0` prints
//! as `0`, non-finite values as `NaN`, `inf` and `-inf`.

/// Number of significant digits kept in emitted numbers.
pub const SIGNIFICANT_DIGITS: usize = 6;

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("scientific formatting of a finite float parses back");
    if rounded == 0.0 {
        return "0".to_string();
    }
    format!("{rounded}")
}

/// Formats an optional value, printing `NA` when absent.
pub fn format_optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_else(|| "NA".to_string())
}
