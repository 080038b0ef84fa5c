//! Simulation config documents.
//!
//! ```json
//! {"schema_version": 1, "name": "setting1", "m": 200, "n": 200, "p": 300, "seed": 7, "param": 8.0}
//! ```
//!
//! `param` is τ for `setting1`, γ for `setting2` and θ for `clustering`.

use std::path::Path;

use eotmaps::Preset;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub schema_version: u32,
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub param: f64,
    /// Accept a parameter outside its benchmark range.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

impl SimulationConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "field `schema_version`: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        for (field, value) in [("m", cfg.m), ("n", cfg.n), ("p", cfg.p)] {
            if value == 0 {
                return Err(CliError::Config(format!(
                    "field `{field}`: must be at least 1"
                )));
            }
        }
        cfg.preset()?;
        Ok(cfg)
    }

    pub fn preset(&self) -> Result<Preset> {
        let preset = match self.name.as_str() {
            "setting1" => Preset::Setting1 { tau: self.param },
            "setting2" => Preset::Setting2 { gamma: self.param },
            "clustering" => Preset::Clustering { theta: self.param },
            other => {
                return Err(CliError::Config(format!(
                    "field `name`: unknown preset '{other}' (expected setting1, setting2 or clustering)"
                )))
            }
        };
        if !self.allow_out_of_range {
            preset
                .check_range()
                .map_err(|e| CliError::Config(format!("field `param`: {e}")))?;
        }
        Ok(preset)
    }
}
