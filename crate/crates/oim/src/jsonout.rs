//! Minimal deterministic JSON output.
//!
//! The run outputs pin every float to 17 significant digits
//! (`{:.16e}`), which a general-purpose serializer does not do; the flat
//! objects written here need nothing more than ordered keys and a handful
//! of value shapes.

use std::fmt::Write as _;

pub enum JsonValue {
    Bool(bool),
    Uint(usize),
    Float(f64),
    FloatArray(Vec<f64>),
    UintArray(Vec<usize>),
    Str(String),
}

/// 17 significant digits, scientific; fixed width keeps outputs bitwise
/// reproducible across runs.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct JsonObject {
    entries: Vec<(&'static str, JsonValue)>,
}

impl JsonObject {
    pub fn new() -> Self {
        JsonObject { entries: Vec::new() }
    }

    pub fn push(&mut self, key: &'static str, value: JsonValue) {
        self.entries.push((key, value));
    }

    pub fn render(&self) -> String {
        let mut out = String::from("{\n");
        for (k, (key, value)) in self.entries.iter().enumerate() {
            let _ = write!(out, "  \"{key}\": ");
            match value {
                JsonValue::Bool(b) => {
                    let _ = write!(out, "{b}");
                }
                JsonValue::Uint(u) => {
                    let _ = write!(out, "{u}");
                }
                JsonValue::Float(x) => out.push_str(&format_float(*x)),
                JsonValue::Str(s) => {
                    let _ = write!(out, "\"{s}\"");
                }
                JsonValue::FloatArray(xs) => {
                    out.push('[');
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(&format_float(*x));
                    }
                    out.push(']');
                }
                JsonValue::UintArray(us) => {
                    out.push('[');
                    for (i, u) in us.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "{u}");
                    }
                    out.push(']');
                }
            }
            out.push_str(if k + 1 < self.entries.len() { ",\n" } else { "\n" });
        }
        out.push_str("}\n");
        out
    }
}

impl Default for JsonObject {
    fn default() -> Self {
        Self::new()
    }
}
