//! Sweep configuration from TOML files and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::entropy::DENSE_CAP;
use crate::error::{Error, Result};
use crate::funcgrid::FunctionSpec;

/// Inclusive `lo..=hi` range of qubit counts, written `lo:hi[:step]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
    pub step: usize,
}

impl NRange {
    pub fn new(lo: usize, hi: usize, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidConfig("N range step must be positive".into()));
        }
        if lo < 2 {
            return Err(Error::InvalidConfig(format!(
                "N range starts at {lo}; need N ≥ 2"
            )));
        }
        if hi < lo {
            return Err(Error::InvalidConfig(format!("N range {lo}:{hi} is empty")));
        }
        Ok(NRange { lo, hi, step })
    }

    pub fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).step_by(self.step).collect()
    }
}

impl FromStr for NRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| {
            p.trim().parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!("bad N range `{s}`; expected lo:hi[:step]"))
            })
        };
        match parts.as_slice() {
            [n] => NRange::new(num(n)?, num(n)?, 1),
            [lo, hi] => NRange::new(num(lo)?, num(hi)?, 1),
            [lo, hi, step] => NRange::new(num(lo)?, num(hi)?, num(step)?),
            _ => Err(Error::InvalidConfig(format!(
                "bad N range `{s}`; expected lo:hi[:step]"
            ))),
        }
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 1 {
            write!(f, "{}:{}", self.lo, self.hi)
        } else {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
        }
    }
}

impl Serialize for NRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Function spec strings in the `family[:k=v,...]` grammar.
    pub functions: Vec<String>,
    pub n_range: NRange,
    pub chi_list: Vec<usize>,
    pub delta: f64,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    /// Largest N whose entropy profile uses dense unfoldings.
    pub dense_cap: usize,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Fill the `runtime_ms` column. Off by default so that output is
    /// reproducible byte for byte.
    pub record_timing: bool,
}

impl SweepConfig {
    pub fn new(functions: Vec<String>, n_range: NRange) -> Self {
        SweepConfig {
            functions,
            n_range,
            chi_list: vec![1, 2, 4],
            delta: 0.01,
            output_path: None,
            seed: 0,
            dense_cap: 16,
            workers: 0,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() {
            return Err(Error::InvalidConfig("no functions given".into()));
        }
        NRange::new(self.n_range.lo, self.n_range.hi, self.n_range.step)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta = {} must lie in (0, 1)",
                self.delta
            )));
        }
        if self.chi_list.contains(&0) {
            return Err(Error::InvalidConfig(
                "truncation ranks must be positive".into(),
            ));
        }
        if self.dense_cap > DENSE_CAP {
            return Err(Error::InvalidConfig(format!(
                "dense_cap = {} exceeds {DENSE_CAP}",
                self.dense_cap
            )));
        }
        Ok(())
    }

    /// Parsed specs; a malformed entry is reported rather than aborting.
    pub fn parsed_functions(&self) -> Vec<(String, Result<FunctionSpec>)> {
        self.functions
            .iter()
            .map(|s| (s.clone(), s.parse::<FunctionSpec>()))
            .collect()
    }
}

/// Every field optional; used for config files and for flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub functions: Option<Vec<String>>,
    pub n_range: Option<NRange>,
    pub chi_list: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dense_cap: Option<usize>,
    pub workers: Option<usize>,
    pub record_timing: Option<bool>,
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: PartialConfig) -> PartialConfig {
        PartialConfig {
            functions: top.functions.or(self.functions),
            n_range: top.n_range.or(self.n_range),
            chi_list: top.chi_list.or(self.chi_list),
            delta: top.delta.or(self.delta),
            output_path: top.output_path.or(self.output_path),
            seed: top.seed.or(self.seed),
            dense_cap: top.dense_cap.or(self.dense_cap),
            workers: top.workers.or(self.workers),
            record_timing: top.record_timing.or(self.record_timing),
        }
    }

    pub fn resolve(self) -> Result<SweepConfig> {
        let functions = self
            .functions
            .ok_or_else(|| Error::InvalidConfig("`functions` is required".into()))?;
        let n_range = self
            .n_range
            .ok_or_else(|| Error::InvalidConfig("`n_range` is required".into()))?;
        let base = SweepConfig::new(functions, n_range);
        let config = SweepConfig {
            chi_list: self.chi_list.unwrap_or(base.chi_list.clone()),
            delta: self.delta.unwrap_or(base.delta),
            output_path: self.output_path,
            seed: self.seed.unwrap_or(base.seed),
            dense_cap: self.dense_cap.unwrap_or(base.dense_cap),
            workers: self.workers.unwrap_or(base.workers),
            record_timing: self.record_timing.unwrap_or(base.record_timing),
            ..base
        };
        config.validate()?;
        Ok(config)
    }
}
