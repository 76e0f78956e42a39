//! Helpers for emitting reports with a fixed number of significant digits.

use serde::Serialize;
use serde_json::Value;

/// Significant digits kept in every printed floating-point value.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Formats `x` with at most [`SIGNIFICANT_DIGITS`] significant digits, for CSV output.
pub fn format_sig(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        r.to_string()
    }
}

/// Rounds every float inside a JSON value in place. Integers are left alone.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes `report` to pretty JSON with rounded floats.
pub fn to_json_string<T: Serialize>(report: &T) -> serde_json::Result<String> {
    let mut value = serde_json::to_value(report)?;
    round_json(&mut value);
    serde_json::to_string_pretty(&value)
}
