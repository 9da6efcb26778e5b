//! Canonical JSON: sorted object keys, no insignificant whitespace, floats
//! rounded to 9 significant digits.
//!
//! Every artifact the kit writes (scenes, traces, QA records, manifests,
//! reports, wire payloads) goes through this one serializer so that golden
//! files and determinism checks can compare bytes.

use serde::Serialize;
use serde_json::{Number, Value};

/// Significant digits kept for floating point values.
pub const FLOAT_SIG_DIGITS: usize = 9;

/// Serializes `value` to a canonical JSON string.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out);
    Ok(out)
}

/// Canonical form of an already-built [`Value`].
pub fn value_to_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Rounds `x` to [`FLOAT_SIG_DIGITS`] significant digits and renders it.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    let rounded: f64 = format!("{:.*e}", FLOAT_SIG_DIGITS - 1, x)
        .parse()
        .expect("scientific notation round-trips");
    if rounded == 0.0 {
        return "0.0".to_string();
    }
    let mut s = format!("{rounded}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") {
        s.push_str(".0");
    }
    s
}

fn write_number(n: &Number, out: &mut String) {
    if n.is_i64() || n.is_u64() {
        out.push_str(&n.to_string());
    } else {
        out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escape")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key escape"));
                out.push(':');
                write_value(&map[*k], out);
            }
            out.push('}');
        }
    }
}
