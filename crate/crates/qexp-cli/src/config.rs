// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration: defaults, then a `key=value` file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qexp_core::{GroupParams, LatticeSpec, QuadratureSpec, ResidualReport};

use crate::CliError;

/// Keys accepted in a config file.
const KEYS: &[&str] = &[
    "N",
    "M",
    "kappa",
    "width",
    "center",
    "rel_tol",
    "abs_tol",
    "max_levels",
    "format",
    "out",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Arg(format!("unknown output format '{s}' (json|csv)"))),
        }
    }
}

/// Everything a subcommand needs to reproduce a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub kappa: usize,
    /// Packet width in units of the base grid step.
    pub width: f64,
    pub center: f64,
    pub quad: QuadratureSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 6,
            m: 256,
            kappa: 8,
            width: 8.0,
            center: 0.0,
            quad: QuadratureSpec::default(),
            format: Format::Json,
            out: None,
            seed: 0,
        }
    }
}

/// Raw `key=value` pairs from a config file. `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Arg(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Arg(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Arg(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Arg(format!("bad value for {key}: '{v}'")))
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub kappa: Option<usize>,
    pub width: Option<f64>,
    pub center: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_levels: Option<u32>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn resolve(file: &BTreeMap<String, String>, flags: &Overrides) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        for (k, v) in file {
            match k.as_str() {
                "N" => c.n = parse(k, v)?,
                "M" => c.m = parse(k, v)?,
                "kappa" => c.kappa = parse(k, v)?,
                "width" => c.width = parse(k, v)?,
                "center" => c.center = parse(k, v)?,
                "rel_tol" => c.quad.rel_tol = parse(k, v)?,
                "abs_tol" => c.quad.abs_tol = parse(k, v)?,
                "max_levels" => c.quad.max_levels = parse(k, v)?,
                "format" => c.format = v.parse()?,
                "out" => c.out = Some(PathBuf::from(v)),
                "seed" => c.seed = parse(k, v)?,
                _ => unreachable!("keys are checked on parse"),
            }
        }
        if let Some(v) = flags.n {
            c.n = v;
        }
        if let Some(v) = flags.m {
            c.m = v;
        }
        if let Some(v) = flags.kappa {
            c.kappa = v;
        }
        if let Some(v) = flags.width {
            c.width = v;
        }
        if let Some(v) = flags.center {
            c.center = v;
        }
        if let Some(v) = flags.rel_tol {
            c.quad.rel_tol = v;
        }
        if let Some(v) = flags.abs_tol {
            c.quad.abs_tol = v;
        }
        if let Some(v) = flags.max_levels {
            c.quad.max_levels = v;
        }
        if let Some(v) = &flags.format {
            c.format = v.parse()?;
        }
        if let Some(v) = &flags.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = flags.seed {
            c.seed = v;
        }
        c.quad.validate()?;
        if !(c.width > 0.0) || !c.center.is_finite() {
            return Err(CliError::Arg("width must be positive and center finite".into()));
        }
        Ok(c)
    }

    pub fn params(&self) -> Result<GroupParams, CliError> {
        Ok(GroupParams::new(self.n)?)
    }

    pub fn grid(&self) -> Result<LatticeSpec, CliError> {
        Ok(LatticeSpec::new(self.params()?, self.m, self.kappa)?)
    }

    /// Stamp the run parameters into a report.
    pub fn stamp(&self, report: &mut ResidualReport, spec: Option<&LatticeSpec>) {
        let meta = &mut report.meta;
        meta.n = self.n;
        meta.seed = self.seed;
        if let Some(s) = spec {
            meta.m = s.m;
            meta.h = s.h;
            meta.kappa = s.kappa;
            meta.state.insert("packet.width".into(), self.width * s.h);
            meta.state.insert("packet.center".into(), self.center);
        }
        meta.state.insert("quad.rel_tol".into(), self.quad.rel_tol);
        meta.state.insert("quad.abs_tol".into(), self.quad.abs_tol);
        meta.state.insert("quad.max_levels".into(), self.quad.max_levels as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = parse_config("N = 8\nM=128 # small\n\nkappa=4\nformat=csv\n").unwrap();
        let flags = Overrides {
            n: Some(6),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(&file, &flags).unwrap();
        assert_eq!((c.n, c.m, c.kappa, c.format), (6, 128, 4, Format::Csv));
    }

    #[test]
    fn rejects_unknown_keys_and_junk() {
        assert!(parse_config("colour=red").is_err());
        assert!(parse_config("N").is_err());
        let file = parse_config("M=lots").unwrap();
        assert!(RunConfig::resolve(&file, &Overrides::default()).is_err());
    }
}
