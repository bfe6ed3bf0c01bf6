//! Runtime parameters for every pipeline stage.
//!
//! All numeric defaults live here so that a single TOML file passed via
//! `--config` can override any of them. Fields left out of the file keep
//! their defaults.

use serde::{Deserialize, Serialize};

use crate::geom::{RobotParams, SolverParams};
use crate::stability::SimulationParams;

/// Contact-detection tolerances used for support-graph derivation and
/// configuration validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ContactParams {
    /// Maximum vertical gap between a block's lower surface and its
    /// supporter's upper surface for the pair to count as a contact (m).
    /// Absorbs physics-settling jitter.
    pub gap_tolerance: f64,
    /// Minimum horizontal overlap area of the contact patch (m^2).
    pub min_overlap_area: f64,
    /// Sampling resolution (cells per axis) for the column-gap contact test.
    pub grid_resolution: usize,
    /// Maximum box-box overlap volume before a configuration is rejected as
    /// interpenetrating (m^3).
    pub max_overlap_volume: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            gap_tolerance: 2e-3,
            min_overlap_area: 1e-5,
            grid_resolution: 96,
            max_overlap_volume: 1e-9,
        }
    }
}

/// Symbolic search limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    /// Hard cap on untimed sequence length.
    pub max_length: usize,
    /// Extra sequence length explored beyond the minimal solution length.
    /// Bounds the otherwise unbounded family of detour solutions; `None`
    /// enumerates all lengths up to `max_length`.
    pub length_window: Option<usize>,
    /// Node budget for exhaustive search (expansions).
    pub node_budget: usize,
    /// Iteration budget for MCTS.
    pub mcts_iterations: usize,
    /// UCT exploration constant.
    pub mcts_exploration: f64,
    /// Seed for the MCTS rollout policy.
    pub mcts_seed: u64,
    /// Positional tolerance when deciding a block is already at its target
    /// pose (m).
    pub preplaced_pos_tolerance: f64,
    /// Angular tolerance for the same decision (rad).
    pub preplaced_rot_tolerance: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            max_length: 12,
            length_window: Some(2),
            node_budget: 20_000_000,
            mcts_iterations: 50_000,
            mcts_exploration: std::f64::consts::SQRT_2,
            mcts_seed: 7,
            preplaced_pos_tolerance: 1e-3,
            preplaced_rot_tolerance: 1f64.to_radians(),
        }
    }
}

/// Top-level configuration: one section per stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub contact: ContactParams,
    pub search: SearchParams,
    pub robot: RobotParams,
    pub solver: SolverParams,
    pub physics: SimulationParams,
    /// Softmax temperature for the choice model. The headline predictions
    /// use 1.0; other values are for sensitivity analysis only.
    pub temperature: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            contact: ContactParams::default(),
            search: SearchParams::default(),
            robot: RobotParams::default(),
            solver: SolverParams::default(),
            physics: SimulationParams::default(),
            temperature: 1.0,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        let mut cfg: Config = toml::from_str(text)?;
        if cfg.temperature == 0.0 {
            cfg.temperature = 1.0;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::from_toml_str(&text).map_err(ConfigError::Parse)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Io(String, std::io::Error),
    #[error("config parse error: {0}")]
    Parse(toml::de::Error),
}
