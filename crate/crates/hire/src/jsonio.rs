//! Deterministic JSON emission helpers.
//!
//! Every file this project writes (graphs, checkpoints, metrics) must be
//! byte-identical across reruns, so JSON is emitted with a fixed key order
//! and floats are printed with 17 significant digits — enough to round-trip
//! any `f64` exactly. Parsing uses `serde_json` as usual; only the writer
//! is constrained.

/// Format a float with 17 significant digits as a JSON-compatible number.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY || v == f64::NEG_INFINITY || v.is_nan() {
        // JSON has no non-finite literals; persisted values are finite by
        // construction, so this is a programming error surfaced loudly.
        panic!("attempted to serialize non-finite float {v}");
    }
    format!("{:.16e}", v)
}

/// Append a float array (`[a,b,...]`) to `out`.
pub fn push_f64_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
    }
    out.push(']');
}

/// Append a usize array to `out`.
pub fn push_usize_array(out: &mut String, values: &[usize]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v.to_string());
    }
    out.push(']');
}

/// Append a JSON string literal with the escapes JSON requires.
pub fn push_str(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}
