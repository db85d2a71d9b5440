//! Float formatting for CSV output.

/// Formats a float with 17 significant digits (`{:.16e}`), enough to
/// round-trip any f64 exactly; re-parsing and re-formatting is idempotent.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
