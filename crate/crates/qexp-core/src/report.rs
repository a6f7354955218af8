// SPDX-License-Identifier: MIT OR Apache-2.0

//! Named residuals with run metadata, serializable to JSON and CSV.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QexpError, Result};

/// Run metadata. Maps are ordered so serialization is canonical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub h: f64,
    pub kappa: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub version: String,
    /// Packet widths, centres and other state descriptors.
    pub state: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub meta: RunMeta,
    pub residuals: BTreeMap<String, f64>,
}

impl ResidualReport {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            meta: RunMeta {
                version: env!("CARGO_PKG_VERSION").to_string(),
                ..RunMeta::default()
            },
            residuals: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.meta.tolerances.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.residuals.get(key).copied()
    }

    /// Largest residual, `NaN` if any residual is not finite.
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(
            0.0,
            |m: f64, &v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) },
        )
    }

    /// Residuals that exceed their tolerance of the same name. Residuals
    /// without a tolerance are informational.
    pub fn violations(&self) -> Vec<String> {
        self.residuals
            .iter()
            .filter_map(|(k, v)| {
                let tol = self.meta.tolerances.get(k)?;
                (!(v <= tol)).then(|| k.clone())
            })
            .collect()
    }

    /// Merge another report's residuals and tolerances under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: &ResidualReport) {
        for (k, v) in &other.residuals {
            self.residuals.insert(format!("{prefix}{k}"), *v);
        }
        for (k, v) in &other.meta.tolerances {
            self.meta.tolerances.insert(format!("{prefix}{k}"), *v);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| QexpError::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| QexpError::Parse(e.to_string()))
    }

    /// `name,value,tolerance` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance\n");
        for (k, v) in &self.residuals {
            let tol = self
                .meta
                .tolerances
                .get(k)
                .map(|t| format!("{t:e}"))
                .unwrap_or_default();
            out.push_str(&format!("{k},{v:e},{tol}\n"));
        }
        out
    }
}
