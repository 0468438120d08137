//! The JSON object every subcommand prints.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Decision outcome; drives the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Yes,
    No,
}

#[derive(Debug)]
pub struct Report {
    pub outcome: Outcome,
    body: Map<String, Value>,
    timings: Map<String, Value>,
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Hex SHA-256 of the raw input bytes.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(subcommand: &str, input_digest: Option<String>) -> Self {
        let mut body = Map::new();
        body.insert("subcommand".into(), subcommand.into());
        body.insert("input_digest".into(), to_value(input_digest));
        Report {
            outcome: Outcome::Yes,
            body,
            timings: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.body.insert(key.into(), to_value(v));
        self
    }

    pub fn time(&mut self, key: &str, ms: f64) -> &mut Self {
        self.timings.insert(key.into(), to_value(round_ms(ms)));
        self
    }

    pub fn timing(&mut self, key: &str, v: Value) -> &mut Self {
        self.timings.insert(key.into(), v);
        self
    }

    pub fn snapshot(&self) -> Value {
        let mut body = self.body.clone();
        body.insert("timings".into(), Value::Object(self.timings.clone()));
        Value::Object(body)
    }

    pub fn into_value(self) -> Value {
        let mut body = self.body;
        body.insert("timings".into(), Value::Object(self.timings));
        Value::Object(body)
    }
}

pub fn round_ms(ms: f64) -> f64 {
    (ms * 1000.0).round() / 1000.0
}

/// `key: value` lines, nested objects flattened with dots.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    flatten("", v, &mut out);
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => {
            out.push_str(prefix);
            out.push_str(": ");
            match other {
                Value::String(s) => out.push_str(s),
                _ => out.push_str(&other.to_string()),
            }
            out.push('\n');
        }
    }
}
