use fba_core::{Label, Trimap};
use serde_json::{json, Map, Value};

pub const TOOL: &str = "fba";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common leading fields of every JSON report.
pub fn envelope(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!(TOOL));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m
}

/// `{"raw": v, "table": f(v)}`, or `null` when not computed.
pub fn metric(raw: Option<f64>, table: fn(f64) -> f64) -> Value {
    match raw {
        Some(v) => json!({ "raw": v, "table": table(v) }),
        None => Value::Null,
    }
}

pub fn conventions() -> Value {
    json!({
        "sad": "raw / 1000",
        "mse": "raw * 1000",
        "grad": "raw / 1000",
        "conn": "raw / 1000",
        "sad_fg": "raw / 1000",
        "mse_fg": "raw * 1000",
    })
}

pub fn label_counts(t: &Trimap) -> Value {
    json!({
        "background": t.count(Label::Background),
        "unknown": t.count(Label::Unknown),
        "foreground": t.count(Label::Foreground),
    })
}
