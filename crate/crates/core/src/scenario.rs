//! Scenario files (TOML).
//!
//! ```toml
//! m = 2
//! s = 0
//! S = 3
//! truncation = 75          # optional
//! lambda = [1.0, 2.0]
//! mu     = [3.0, 4.0]
//! xi     = [0.1, 0.2]
//! alpha  = [1.0, 1.0]
//! theta  = [1.0, 1.0]
//! Q = [[-1.0, 1.0], [2.0, -2.0]]
//!
//! [sim]                    # optional, every key optional
//! horizon = 200000.0
//! warmup = 10000.0
//! replications = 20
//! seed = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnvironmentParams, InventoryPolicy, ModelSpec};
use crate::simulator::SimConfig;

pub use crate::solver::DEFAULT_TRUNCATION;

const LOW_TRAFFIC: &str = include_str!("../../../scenarios/low_traffic.toml");
const HIGH_TRAFFIC: &str = include_str!("../../../scenarios/high_traffic.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub m: usize,
    pub s: u32,
    #[serde(rename = "S")]
    pub capacity: u32,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub xi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(rename = "Q")]
    pub generator: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub horizon: Option<f64>,
    pub warmup: Option<f64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub orbit_cap: Option<u64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            env: EnvironmentParams {
                states: self.m,
                lambda: self.lambda.clone(),
                mu: self.mu.clone(),
                xi: self.xi.clone(),
                alpha: self.alpha.clone(),
                theta: self.theta.clone(),
                generator: self.generator.clone(),
            },
            policy: InventoryPolicy::new(self.s, self.capacity),
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or(DEFAULT_TRUNCATION)
    }

    /// Simulation settings from the `[sim]` block over the defaults.
    pub fn sim_config(&self) -> SimConfig {
        let mut cfg = SimConfig::default();
        if let Some(block) = &self.sim {
            if let Some(h) = block.horizon {
                cfg.horizon = h;
            }
            if let Some(w) = block.warmup {
                cfg.warmup = w;
            }
            if let Some(r) = block.replications {
                cfg.replications = r;
            }
            if let Some(s) = block.seed {
                cfg.seed = s;
            }
            if let Some(c) = block.orbit_cap {
                cfg.orbit_cap = c;
            }
        }
        cfg
    }
}

/// Scenarios shipped with the crate: `low_traffic` and `high_traffic`.
pub fn bundled(name: &str) -> Result<ScenarioFile> {
    match name {
        "low_traffic" => ScenarioFile::parse(LOW_TRAFFIC),
        "high_traffic" => ScenarioFile::parse(HIGH_TRAFFIC),
        other => Err(Error::Scenario(format!("no bundled scenario named `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        let low = bundled("low_traffic").unwrap();
        assert_eq!(low.m, 7);
        assert_eq!((low.s, low.capacity), (10, 35));
        assert_eq!(low.truncation(), 75);
        assert_eq!(low.theta[4], 5.0);
        let high = bundled("high_traffic").unwrap();
        assert_eq!(high.mu[6], 0.3);
        assert_eq!(high.generator[6][6], -22.8);
        assert!(bundled("nope").is_err());
    }

    #[test]
    fn parse_error_carries_line() {
        let err = ScenarioFile::parse("m = 2\ns = [\n").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn sim_block_overrides_defaults() {
        let mut sc = bundled("low_traffic").unwrap();
        sc.sim = Some(SimBlock {
            replications: Some(3),
            ..Default::default()
        });
        let cfg = sc.sim_config();
        assert_eq!(cfg.replications, 3);
        assert_eq!(cfg.horizon, SimConfig::default().horizon);
    }
}
