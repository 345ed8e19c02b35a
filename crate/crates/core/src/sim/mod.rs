//! Discrete-event Monte Carlo engine.
//!
//! Degradation paths are resolved on a grid of step `δ` anchored at the start
//! of every inter-inspection interval (the last cell before an inspection or a
//! maintenance time may be shorter). Paths are advanced in blocks of up to 32
//! cells; a block is split into its cells (exactly, through the Dirichlet
//! representation of gamma increments) only when something inside it matters:
//! a failure-threshold crossing, the non-degrading failure, or a level low
//! enough for the exponential reward term to be non-negligible.

mod curves;
mod engine;
mod estimate;

pub use curves::{critical_probability_curve, reward_rate_curve, CurvePoint};
pub use engine::{run_cycle, CycleEngine};
pub use estimate::{
    cycles_from_state, estimate_cost_rate, run_replications, stationary_sample, CostRateEstimate, Replication,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StartState, SystemSpec};

/// Simulation effort and discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Path discretization `δ`.
    pub grid_step: f64,
    /// Cycles per replication, warmup included.
    pub horizon_cycles: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Cycles discarded at the start of each replication.
    pub warmup_cycles: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { grid_step: 0.01, horizon_cycles: 2600, replications: 20, base_seed: 0, warmup_cycles: 100 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::Config(format!("grid step must be positive, got {}", self.grid_step)));
        }
        if self.horizon_cycles == 0 {
            return Err(Error::Config("horizon must contain at least one cycle".into()));
        }
        if self.horizon_cycles <= self.warmup_cycles {
            return Err(Error::Config(format!(
                "horizon of {} cycles leaves nothing after {} warmup cycles",
                self.horizon_cycles, self.warmup_cycles
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("at least one replication is required".into()));
        }
        Ok(())
    }

    /// Also checks that the grid resolves the delay: `δ ≤ τ / 5` when `τ > 0`.
    pub fn validate_for(&self, s: &SystemSpec) -> Result<()> {
        self.validate()?;
        if s.delay > 0.0 && self.grid_step > s.delay / 5.0 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "grid step {} is too coarse for delay {} (must be at most {})",
                self.grid_step,
                s.delay,
                s.delay / 5.0
            )));
        }
        Ok(())
    }

    pub fn post_warmup_cycles(&self) -> usize {
        self.replications * (self.horizon_cycles - self.warmup_cycles)
    }

    /// Independent random stream for replication `stream`.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(stream);
        rng
    }
}

/// What ended a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    /// No failure; an inspection found some level at or above its preventive threshold.
    InspectionOnly,
    /// A degrading component failed and the delay elapsed before the next inspection.
    DegradingFailureDelay,
    /// The non-degrading part failed and the delay elapsed before the next inspection.
    NondegradingFailureDelay,
    /// A failure occurred less than one delay before the next inspection, which
    /// became the maintenance time.
    InspectionAfterLateFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    None,
    Preventive,
    Corrective,
}

/// Costs incurred and reward earned, either over one cycle or per unit time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub preventive: f64,
    pub corrective_degrading: f64,
    pub corrective_nondegrading: f64,
    pub inspections: f64,
    pub downtime: f64,
    pub reward: f64,
}

impl CostBreakdown {
    pub fn total_cost(&self) -> f64 {
        self.preventive + self.corrective_degrading + self.corrective_nondegrading + self.inspections + self.downtime
    }

    /// Costs minus reward.
    pub fn net(&self) -> f64 {
        self.total_cost() - self.reward
    }

    pub fn add(&mut self, o: &CostBreakdown) {
        self.preventive += o.preventive;
        self.corrective_degrading += o.corrective_degrading;
        self.corrective_nondegrading += o.corrective_nondegrading;
        self.inspections += o.inspections;
        self.downtime += o.downtime;
        self.reward += o.reward;
    }

    pub fn scaled(&self, f: f64) -> CostBreakdown {
        CostBreakdown {
            preventive: self.preventive * f,
            corrective_degrading: self.corrective_degrading * f,
            corrective_nondegrading: self.corrective_nondegrading * f,
            inspections: self.inspections * f,
            downtime: self.downtime * f,
            reward: self.reward * f,
        }
    }
}

/// One semi-regenerative cycle, from a post-maintenance state to the next maintenance time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub duration: f64,
    pub trigger: Trigger,
    pub actions: Vec<Action>,
    pub nondegrading_repaired: bool,
    /// Inspections passed without action before the maintenance time.
    pub inspections_count: u32,
    /// Per-component time spent failed before the maintenance time.
    pub downtime: Vec<f64>,
    pub nondegrading_downtime: f64,
    pub reward_integral: f64,
    pub costs: CostBreakdown,
    pub critical: bool,
    /// Degradation levels at the maintenance time, before any replacement.
    pub levels_at_maintenance: Vec<f64>,
    pub post_state: StartState,
}

impl CycleRecord {
    /// Index `k` of the inspection interval `(T_{k-1}, T_k]` holding the maintenance time.
    pub fn interval_index(&self) -> u32 {
        self.inspections_count + 1
    }
}

#[cfg(test)]
mod tests;
