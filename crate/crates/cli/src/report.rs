//! Run reports: the JSON document every command writes.

use std::io::Write;

use illiq_core::{AdaptedVectorProcess, EventTree};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub inputs: Inputs,
    pub results: Value,
    pub stats: Stats,
}

/// Everything the command read, embedded verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    /// SHA-256 of the canonical JSON of the other input fields.
    pub digest: String,
    pub model: Option<Value>,
    pub claim: Option<Value>,
    pub premium: Option<Value>,
    /// Command options that affect the result.
    pub options: Value,
}

impl Inputs {
    pub fn new(model: Option<Value>, claim: Option<Value>, premium: Option<Value>, options: Value) -> Self {
        let mut inputs = Inputs {
            digest: String::new(),
            model,
            claim,
            premium,
            options,
        };
        inputs.digest = inputs.compute_digest();
        inputs
    }

    pub fn compute_digest(&self) -> String {
        let canonical = json!({
            "model": self.model,
            "claim": self.claim,
            "premium": self.premium,
            "options": self.options,
        });
        let bytes = serde_json::to_vec(&canonical).expect("JSON values serialize");
        format!("{:x}", Sha256::digest(bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub lp_count: u64,
    pub pivot_count: u64,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, file: &str) -> Result<Self, CliError> {
        let value = crate::input::parse_json(text, file)?;
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{file}: not a run report: {e}")))
    }

    /// Scalar results as `key,value` rows; nested objects use dotted keys
    /// and arrays are skipped.
    pub fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut rows = Vec::new();
        flatten("", &self.results, &mut rows);
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Input(format!("cannot write CSV: {e}"));
        w.write_record(["key", "value"]).map_err(io)?;
        for (k, v) in rows {
            w.write_record([k, v]).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Input(format!("cannot write CSV: {e}")))
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(_) => {}
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

/// Non-finite floats become `null`.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Values in tree node order.
pub fn process_json(p: &AdaptedVectorProcess) -> Value {
    Value::Array(
        p.values()
            .iter()
            .map(|row| Value::Array(row.iter().map(|&x| number(x)).collect()))
            .collect(),
    )
}

/// Inverse of [`process_json`].
pub fn process_from_json(v: &Value, tree: &EventTree, field: &str) -> Result<AdaptedVectorProcess, CliError> {
    let bad = |m: &str| CliError::Input(format!("report field `{field}`: {m}"));
    let rows = v.as_array().ok_or_else(|| bad("expected an array"))?;
    let values = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| bad("expected arrays of numbers"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad("expected numbers")))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    AdaptedVectorProcess::new(tree, values).map_err(|e| bad(&e.to_string()))
}

pub fn node_ids(tree: &EventTree) -> Value {
    Value::Array(tree.nodes().iter().map(|n| json!(n.id)).collect())
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}
