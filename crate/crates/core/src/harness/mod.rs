//! Scenario generation, local maps, closed-loop episodes, logs and plots.

mod episode;
mod local_map;
mod plot;
mod scenario;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::medial_axis::MedialAxisError;
use crate::mpc::{MpcConfig, MpcError};
use crate::vehicle::{ControllerGains, PlantParams};

pub use episode::{run_episode, EpisodeLog, LogRecord, Outcome, PlanEvent, ReplanEvent, Telemetry};
pub use local_map::{local_bounds, local_map};
pub use plot::render_svg;
pub use scenario::{blocked_corridor, generate_map, Arena, MapSpec, Obstacle, Pose, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("rejection sampling gave up after {0} attempts")]
    RejectionBudget(usize),
    #[error("invalid override {0}")]
    Override(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    MedialAxis(#[from] MedialAxisError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mpc: MpcConfig,
    pub plant: PlantParams,
    pub gains: ControllerGains,
    /// Meters.
    pub robot_radius: f64,
    /// Obstacle and wall inflation for planning, meters.
    pub bloat_margin: f64,
    /// Side of the local map box, meters.
    pub local_box: f64,
    /// Boundary subdivision of the global triangulation, meters.
    pub mesh_max_edge: f64,
    /// Arrival radius, meters.
    pub goal_tolerance: f64,
    /// Arrival speed, m/s.
    pub goal_speed: f64,
    /// Simulated seconds.
    pub time_limit: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mpc: MpcConfig::default(),
            plant: PlantParams::default(),
            gains: ControllerGains::default(),
            robot_radius: 0.15,
            bloat_margin: 0.275,
            local_box: 2.1,
            mesh_max_edge: 0.25,
            goal_tolerance: 0.15,
            goal_speed: 0.05,
            time_limit: 300.0,
        }
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

impl RunConfig {
    /// Applies a nested table of overrides, e.g. `{ mpc = { horizon = 10 } }`.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<RunConfig, HarnessError> {
        let mut table =
            toml::Table::try_from(self).map_err(|e| HarnessError::Override(e.to_string()))?;
        merge(&mut table, overrides);
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Override(e.to_string()))?;
        cfg.mpc.validate()?;
        Ok(cfg)
    }

    /// Applies `key.path=value` assignments, values in TOML syntax.
    pub fn with_assignments(&self, assignments: &[String]) -> Result<RunConfig, HarnessError> {
        let mut text = String::new();
        for a in assignments {
            if !a.contains('=') {
                return Err(HarnessError::Override(a.clone()));
            }
            text.push_str(a);
            text.push('\n');
        }
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| HarnessError::Override(e.to_string()))?;
        self.with_overrides(&table)
    }
}
