//! Locale-free number formatting for CSV and JSON outputs.

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
