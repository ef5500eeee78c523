use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "qsphere-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct NumericResidual {
    pub value: f64,
    pub tol: f64,
}

/// One verification result. `pass` is derived, never set directly.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub check: String,
    pub sphere: String,
    pub parameters: Map<String, Value>,
    pub pass: bool,
    pub residual_term_count: usize,
    pub witnesses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_residuals: Option<BTreeMap<String, NumericResidual>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    pub elapsed_ms: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Report {
    pub fn start(check: &str, sphere: &str) -> Self {
        Report {
            schema: SCHEMA,
            check: check.to_string(),
            sphere: sphere.to_string(),
            parameters: Map::new(),
            pass: false,
            residual_term_count: 0,
            witnesses: Vec::new(),
            numeric_residuals: None,
            value: None,
            elapsed_ms: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn witness(&mut self, w: String) {
        self.witnesses.push(w);
    }

    pub fn numeric(&mut self, label: impl Into<String>, value: f64, tol: f64) {
        self.numeric_residuals.get_or_insert_with(BTreeMap::new).insert(label.into(), NumericResidual { value, tol });
    }

    /// Stamps the elapsed time and derives `pass`. `extra` carries
    /// check-specific conditions that are neither term counts nor numeric.
    pub fn finish(mut self, extra: bool) -> Self {
        let numeric_ok = self.numeric_residuals.iter().flatten().all(|(_, r)| r.value <= r.tol);
        self.pass = extra && self.residual_term_count == 0 && numeric_ok;
        if let Some(t) = self.started.take() {
            self.elapsed_ms = t.elapsed().as_secs_f64() * 1e3;
        }
        self
    }
}
