//! JSON run summaries.
//!
//! Keys are emitted in sorted order and floats in their shortest round-trip
//! form, so identical runs give byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::integrator::Stats;
use crate::io::config::RawConfig;

/// Headline numbers of one run plus enough context to repeat it.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RawConfig>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    pub outputs: Vec<String>,
}

impl Summary {
    pub fn new(command: impl Into<String>, config: Option<&RawConfig>) -> Self {
        Summary {
            command: command.into(),
            config: config.cloned(),
            ..Default::default()
        }
    }

    /// Records a metric; non-finite floats are stored as `null`.
    pub fn metric(&mut self, name: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(name.into(), v);
        self
    }

    pub fn output(&mut self, file: impl Into<String>) -> &mut Self {
        self.outputs.push(file.into());
        self
    }

    pub fn to_json_string(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::domain(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&sorted(value)).map_err(|e| Error::domain(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

// serde_json's default map is already ordered; this keeps the output stable
// even if a dependency turns on insertion order.
fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let ordered: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(ordered.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn emit_json(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    if summary.metrics.is_empty() && summary.outputs.is_empty() {
        return Err(Error::EmptyResult(format!("{}", path.as_ref().display())));
    }
    let text = summary.to_json_string()?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sorted_and_nan_is_null() {
        let mut s = Summary::new("demo", None);
        s.metric("zeta", 1.0).metric("alpha", f64::NAN).output("a.csv");
        let text = s.to_json_string().unwrap();
        let a = text.find("\"alpha\"").unwrap();
        let z = text.find("\"zeta\"").unwrap();
        assert!(a < z);
        assert!(text.contains("\"alpha\": null"));
        assert_eq!(text, s.to_json_string().unwrap());
    }

    #[test]
    fn empty_summary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        assert!(emit_json(&Summary::new("x", None), &p).is_err());
        assert!(!p.exists());
    }
}
