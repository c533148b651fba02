//! Optional TOML configuration (`--config`).
//!
//! ```toml
//! node_budget = 50000000
//! oracle_cap = 6
//! frechet_tol = 1e-6
//! frechet_max_iters = 50
//! ```

use std::path::Path;

use mted_core::geometry::FrechetConfig;
use mted_core::SolverConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub node_budget: u64,
    pub oracle_cap: usize,
    pub frechet_tol: f64,
    pub frechet_max_iters: usize,
    pub frechet_inner_iters: usize,
}

impl Default for Config {
    fn default() -> Self {
        let s = SolverConfig::default();
        let f = FrechetConfig::default();
        Config {
            node_budget: s.node_budget,
            oracle_cap: s.oracle_cap,
            frechet_tol: f.tol,
            frechet_max_iters: f.max_iters,
            frechet_inner_iters: f.inner_iters,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let s = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&s)
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::Input(format!("bad config: {e}")))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { node_budget: self.node_budget, oracle_cap: self.oracle_cap }
    }

    pub fn frechet(&self, p: f64) -> FrechetConfig {
        FrechetConfig {
            p,
            tol: self.frechet_tol,
            max_iters: self.frechet_max_iters,
            inner_iters: self.frechet_inner_iters,
            solver: self.solver(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_keep_defaults() {
        let c = Config::parse("node_budget = 10").unwrap();
        assert_eq!(c.node_budget, 10);
        assert_eq!(c.oracle_cap, 6);
        assert!(Config::parse("unknown = 1").is_err());
    }
}
