//! `metrics.json`: one report per method.
//!
//! ```json
//! {
//!   "schema": "idlink-metrics/1",
//!   "reports": [
//!     { "method": "agent", "seed": 0, "n": 40,
//!       "p_at": { "1": 0.5, "5": 0.8 }, "map": 0.61, "recall": 0.45 }
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use idlink_core::eval::MetricsReport;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "idlink-metrics/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub method: String,
    pub seed: u64,
    pub n: usize,
    /// Keyed by `k` as a decimal string.
    pub p_at: BTreeMap<String, f64>,
    pub map: f64,
    pub recall: f64,
}

impl From<&MetricsReport> for ReportJson {
    fn from(r: &MetricsReport) -> Self {
        Self {
            method: r.method.clone(),
            seed: r.seed,
            n: r.n,
            p_at: r.p_at.iter().map(|(k, p)| (k.to_string(), *p)).collect(),
            map: r.map,
            recall: r.recall,
        }
    }
}

impl ReportJson {
    pub fn p(&self, k: usize) -> Option<f64> {
        self.p_at.get(&k.to_string()).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsDocument {
    pub schema: String,
    pub reports: Vec<ReportJson>,
}

impl MetricsDocument {
    pub fn new(reports: &[MetricsReport]) -> Self {
        Self { schema: SCHEMA.to_string(), reports: reports.iter().map(ReportJson::from).collect() }
    }

    pub fn report(&self, method: &str) -> Option<&ReportJson> {
        self.reports.iter().find(|r| r.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and checks the schema tag and value ranges.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema != SCHEMA {
            return Err(Error::Format(format!("unknown metrics schema `{}`", doc.schema)));
        }
        for r in &doc.reports {
            let values = r.p_at.values().chain([&r.map, &r.recall]);
            if values.clone().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Format(format!("report `{}` has a value outside [0, 1]", r.method)));
            }
            if r.p_at.keys().any(|k| k.parse::<usize>().map_or(true, |k| k == 0)) {
                return Err(Error::Format(format!("report `{}` has a bad k", r.method)));
            }
        }
        Ok(doc)
    }
}
