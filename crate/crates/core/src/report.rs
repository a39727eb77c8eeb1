//! Versioned JSON envelope for command results.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// `{schema_version, command, result, timing_ms}`. The result payload is
/// deterministic; only `timing_ms` varies between identical invocations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub command: Value,
    pub result: T,
    pub timing_ms: f64,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: Value, result: T, timing_ms: f64) -> Self {
        Report { schema_version: SCHEMA_VERSION, command, result, timing_ms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers and string keys")
    }
}

/// Collects every `probability`-like field of a JSON value that falls outside `[0, 1]`.
pub fn probability_violations(v: &Value) -> Vec<String> {
    fn walk(v: &Value, path: &str, out: &mut Vec<String>) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let p = format!("{path}.{k}");
                    let is_prob = k.contains("probability") || k == "estimate";
                    if let (true, Some(f)) = (is_prob, x.as_f64()) {
                        if !(0.0..=1.0).contains(&f) {
                            out.push(format!("{p} = {f}"));
                        }
                    }
                    walk(x, &p, out);
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(x, &format!("{path}[{i}]"), out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(v, "$", &mut out);
    out
}

/// Structural check of the envelope: required keys, schema version, probability ranges.
pub fn check_envelope(v: &Value) -> Result<(), String> {
    let obj = v.as_object().ok_or("report is not a JSON object")?;
    for key in ["schema_version", "command", "result", "timing_ms"] {
        if !obj.contains_key(key) {
            return Err(format!("missing key '{key}'"));
        }
    }
    if obj["schema_version"].as_u64() != Some(SCHEMA_VERSION as u64) {
        return Err(format!("schema_version is {}, expected {SCHEMA_VERSION}", obj["schema_version"]));
    }
    if !obj["timing_ms"].is_number() {
        return Err("timing_ms is not a number".into());
    }
    let bad = probability_violations(&obj["result"]);
    if !bad.is_empty() {
        return Err(format!("probabilities outside [0, 1]: {}", bad.join(", ")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn envelope_round_trip() {
        let r = Report::new(json!({"name": "purify"}), json!({"success_probability": 0.5}), 1.25);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        check_envelope(&v).unwrap();
        assert_eq!(v["schema_version"], 1);
    }

    #[test]
    fn bad_probability_is_reported() {
        let v = json!({"schema_version": 1, "command": {}, "timing_ms": 0.0, "result": {"steps": [{"probability": 1.5}]}});
        assert!(check_envelope(&v).unwrap_err().contains("$.steps[0].probability"));
    }
}
