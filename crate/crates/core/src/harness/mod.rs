//! Experiment protocols (ablations, robustness sweeps, moving targets),
//! CSV/SVG reporting and the command implementations behind the CLI.

mod ablation;
pub mod cmd;
mod csvio;
mod report;
mod robust;
pub mod svg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ablation::{ablation_run, apply_arm, curve_summary, curves_csv, AblationResult, CurvePoint, RunCurve};
pub use csvio::{read_table, Table};
pub use report::{emit_report, render_file};
pub use robust::{
    cell_reachable, cell_rotation, grid_csv, moving_csv, moving_events_csv, moving_target_eval, period_steps,
    robustness_grid, spearman, GridCell, SpeedResult,
};

pub const CURVES_SCHEMA: &str = "#schema=graspforge-curves/1";
pub const GRID_SCHEMA: &str = "#schema=graspforge-grid/1";
pub const MOVING_SCHEMA: &str = "#schema=graspforge-moving/1";
pub const EVENTS_SCHEMA: &str = "#schema=graspforge-motion-events/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AblationArm {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "full+imitation")]
    FullImitation,
    /// Palm position only.
    #[serde(rename = "baseline1")]
    Baseline1,
    /// No contact reward.
    #[serde(rename = "baseline2")]
    Baseline2,
}

impl AblationArm {
    pub const ALL: [AblationArm; 4] =
        [AblationArm::Full, AblationArm::FullImitation, AblationArm::Baseline1, AblationArm::Baseline2];

    pub fn name(self) -> &'static str {
        match self {
            AblationArm::Full => "full",
            AblationArm::FullImitation => "full+imitation",
            AblationArm::Baseline1 => "baseline1",
            AblationArm::Baseline2 => "baseline2",
        }
    }
}

impl fmt::Display for AblationArm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationArm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AblationArm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown ablation arm `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationSpec {
    pub arms: Vec<AblationArm>,
    pub seeds: Vec<u64>,
    /// `(K_pI, K_αI)` used by the full+imitation arm.
    pub imitation_weights: [f64; 2],
}

impl Default for AblationSpec {
    fn default() -> Self {
        AblationSpec { arms: AblationArm::ALL.to_vec(), seeds: (0..5).collect(), imitation_weights: [1.0, 1.0] }
    }
}

impl AblationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.imitation_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("ablation.imitation_weights must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessSpec {
    pub yaw_deg: Vec<f64>,
    pub pitch_deg: Vec<f64>,
    /// Target speeds in m/s.
    pub speeds: Vec<f64>,
    /// Seconds between random direction changes.
    pub direction_change_period: f64,
    pub episodes_per_cell: usize,
    /// Evaluation seeds; each seed selects its own episode setups.
    pub seeds: Vec<u64>,
    /// Goals farther than this from the arm's workspace mark a cell unreachable (m).
    pub reach_tolerance: f64,
}

impl Default for RobustnessSpec {
    fn default() -> Self {
        let grid: Vec<f64> = (-3..=3).map(|k| 15.0 * k as f64).collect();
        RobustnessSpec {
            yaw_deg: grid.clone(),
            pitch_deg: grid,
            speeds: vec![0.0, 0.05, 0.1, 0.2, 0.4],
            direction_change_period: 0.5,
            episodes_per_cell: 20,
            seeds: (0..5).collect(),
            reach_tolerance: 0.03,
        }
    }
}

impl RobustnessSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.yaw_deg.is_empty() || self.pitch_deg.is_empty() || self.seeds.is_empty() {
            return bad("robustness grids and seeds must be nonempty");
        }
        if self.yaw_deg.iter().chain(&self.pitch_deg).any(|a| !a.is_finite()) {
            return bad("robustness angles must be finite");
        }
        if self.speeds.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("robustness speeds must be >= 0");
        }
        if !(self.direction_change_period > 0.0) {
            return bad("robustness.direction_change_period must be > 0");
        }
        if self.episodes_per_cell == 0 {
            return bad("robustness.episodes_per_cell must be >= 1");
        }
        if !(self.reach_tolerance >= 0.0) {
            return bad("robustness.reach_tolerance must be >= 0");
        }
        Ok(())
    }
}
