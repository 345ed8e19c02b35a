//! System, component and policy definitions, the reward function and the
//! stability bound on the embedded maintenance chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{increment_cdf_or_degenerate, increment_survival_or_degenerate, GammaParams};

/// One gamma-degrading component with its thresholds, costs and reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub gamma: GammaParams,
    /// Failure threshold `L`.
    pub failure_threshold: f64,
    pub corrective_cost: f64,
    pub preventive_cost: f64,
    /// Cost per unit time while the component is failed and awaiting maintenance.
    pub downtime_cost_rate: f64,
    /// Reward floor `θ₀` per unit time.
    pub reward_floor: f64,
    /// Reward amplitude per unit time (written `g` or `h` in the literature).
    pub reward_amplitude: f64,
    /// Exponential reward decay per degradation unit (`γ`).
    pub reward_decay: f64,
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<()> {
        self.gamma.validate()?;
        if !(self.failure_threshold > 0.0 && self.failure_threshold.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "failure threshold must be positive, got {}",
                self.failure_threshold
            )));
        }
        let money = [
            ("corrective_cost", self.corrective_cost),
            ("preventive_cost", self.preventive_cost),
            ("downtime_cost_rate", self.downtime_cost_rate),
            ("reward_floor", self.reward_floor),
            ("reward_amplitude", self.reward_amplitude),
            ("reward_decay", self.reward_decay),
        ];
        for (name, v) in money {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Reward rate `θ₀ + g e^{-γ x}` ignoring failure.
    pub fn reward_curve(&self, level: f64) -> f64 {
        self.reward_floor + self.reward_amplitude * (-self.reward_decay * level).exp()
    }

    /// Degradation level above which `g e^{-γ x}` is below `1e-12` per unit time,
    /// so the reward rate equals the floor for every practical purpose.
    pub fn flat_reward_level(&self) -> f64 {
        if self.reward_amplitude <= 1e-12 {
            0.0
        } else if self.reward_decay <= 0.0 {
            // Constant reward: flat everywhere as well.
            0.0
        } else {
            (self.reward_amplitude / 1e-12).ln() / self.reward_decay
        }
    }
}

/// Reward earned per unit time by a component at `level`; a failed component
/// (`level ≥ L`) earns nothing.
pub fn reward_rate_at(c: &ComponentSpec, level: f64) -> f64 {
    if level >= c.failure_threshold {
        0.0
    } else {
        c.reward_curve(level.max(0.0))
    }
}

/// The maintained system: degrading components plus one exponentially failing part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub components: Vec<ComponentSpec>,
    /// Failure rate `λ` of the non-degrading part.
    pub nondegrading_rate: f64,
    /// Delay `τ` between a failure signal and the maintenance action.
    pub delay: f64,
    pub nondegrading_corrective_cost: f64,
    pub nondegrading_downtime_cost_rate: f64,
    pub inspection_cost: f64,
}

impl SystemSpec {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// Checks hard invariants and returns warnings for admitted degenerate inputs.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.components.is_empty() {
            return Err(Error::InvalidModel("at least one degrading component is required".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            c.validate().map_err(|e| Error::InvalidModel(format!("component {i}: {e}")))?;
        }
        if !(self.nondegrading_rate >= 0.0 && self.nondegrading_rate.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "non-degrading failure rate must be finite and non-negative, got {}",
                self.nondegrading_rate
            )));
        }
        if self.nondegrading_rate == 0.0 {
            warnings.push("non-degrading failure rate is 0: the non-degrading part never fails".into());
        }
        if !(self.delay >= 0.0 && self.delay.is_finite()) {
            return Err(Error::InvalidModel(format!("delay must be non-negative, got {}", self.delay)));
        }
        if self.delay == 0.0 {
            warnings.push("delay is 0: maintenance happens at the failure instant".into());
        }
        for (name, v) in [
            ("nondegrading_corrective_cost", self.nondegrading_corrective_cost),
            ("nondegrading_downtime_cost_rate", self.nondegrading_downtime_cost_rate),
            ("inspection_cost", self.inspection_cost),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(warnings)
    }

    /// Mean time for the fastest component's mean path to reach its failure threshold.
    pub fn fastest_mean_failure_time(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.gamma.mean_time_to(c.failure_threshold))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Decision variables: inspection period and one preventive threshold per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyVector {
    pub inspection_period: f64,
    pub preventive_thresholds: Vec<f64>,
}

impl PolicyVector {
    pub fn new(inspection_period: f64, preventive_thresholds: Vec<f64>) -> Self {
        PolicyVector { inspection_period, preventive_thresholds }
    }

    /// Flat decision vector `(T, M_1, …, M_m)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.preventive_thresholds.len());
        v.push(self.inspection_period);
        v.extend_from_slice(&self.preventive_thresholds);
        v
    }

    pub fn from_slice(x: &[f64]) -> Self {
        PolicyVector { inspection_period: x[0], preventive_thresholds: x[1..].to_vec() }
    }

    /// Checks `T > 2τ` and `0 < M_i ≤ L_i`; warns when some `M_i = L_i`.
    pub fn validate(&self, s: &SystemSpec) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.preventive_thresholds.len() != s.m() {
            return Err(Error::InvalidModel(format!(
                "policy has {} preventive thresholds for {} components",
                self.preventive_thresholds.len(),
                s.m()
            )));
        }
        let t = self.inspection_period;
        if !(t.is_finite() && t > 2.0 * s.delay && t > 0.0) {
            return Err(Error::InvalidModel(format!(
                "inspection period must exceed twice the delay ({}), got {t}",
                2.0 * s.delay
            )));
        }
        for (i, (&m, c)) in self.preventive_thresholds.iter().zip(&s.components).enumerate() {
            if !(m > 0.0 && m <= c.failure_threshold) {
                return Err(Error::InvalidModel(format!(
                    "preventive threshold {i} must lie in (0, {}], got {m}",
                    c.failure_threshold
                )));
            }
            if m == c.failure_threshold {
                warnings.push(format!("preventive threshold {i} equals the failure threshold: no preventive band"));
            }
        }
        Ok(warnings)
    }
}

/// State of the embedded chain right after a maintenance action: degradation
/// levels and the time remaining until the next scheduled inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub levels: Vec<f64>,
    pub time_to_inspection: f64,
}

impl StartState {
    /// All components new, next inspection a full period away.
    pub fn renewal(s: &SystemSpec, p: &PolicyVector) -> Self {
        StartState { levels: vec![0.0; s.m()], time_to_inspection: p.inspection_period }
    }

    /// Accepts any levels in `[0, L_i)` and `0 < w ≤ T`.
    pub fn validate(&self, s: &SystemSpec, p: &PolicyVector) -> Result<()> {
        if self.levels.len() != s.m() {
            return Err(Error::InvalidModel(format!(
                "start state has {} levels for {} components",
                self.levels.len(),
                s.m()
            )));
        }
        for (i, (&x, c)) in self.levels.iter().zip(&s.components).enumerate() {
            if !(x >= 0.0 && x < c.failure_threshold) {
                return Err(Error::InvalidModel(format!(
                    "start level {i} must lie in [0, {}), got {x}",
                    c.failure_threshold
                )));
            }
        }
        let w = self.time_to_inspection;
        if !(w > 0.0 && w <= p.inspection_period) {
            return Err(Error::InvalidModel(format!(
                "time to inspection must lie in (0, {}], got {w}",
                p.inspection_period
            )));
        }
        Ok(())
    }
}

/// Bound on the critical-situation probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub safety_limit: f64,
}

impl ConstraintSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.safety_limit > 0.0 && self.safety_limit < 1.0) {
            return Err(Error::InvalidModel(format!("safety limit must lie in (0, 1), got {}", self.safety_limit)));
        }
        Ok(())
    }
}

/// Stability bound `μ`; `μ < 1` guarantees a finite mean time to a full renewal
/// and hence a stationary law for the post-maintenance chain.
///
/// `μ = 1 − e^{−λ(T−τ)} ∏ᵢ P(X_i(τ) > M_i) · P(X_i(T−τ) ≤ L_i − M_i)`,
/// with a zero-length increment taken as identically zero.
pub fn lemma1_mu(s: &SystemSpec, p: &PolicyVector) -> f64 {
    let t = p.inspection_period;
    let tau = s.delay;
    let mut prod = (-s.nondegrading_rate * (t - tau)).exp();
    for (c, &m) in s.components.iter().zip(&p.preventive_thresholds) {
        let worn_at_delay = increment_survival_or_degenerate(&c.gamma, tau, m);
        let survives_rest = increment_cdf_or_degenerate(&c.gamma, t - tau, c.failure_threshold - m);
        prod *= worn_at_delay * survives_rest;
    }
    (1.0 - prod).clamp(0.0, 1.0)
}

/// Parameter sets used throughout the test-suite and the CLI defaults.
pub mod presets {
    use super::*;

    /// Gamma rate matching a scale of 0.5 degradation units per unit shape.
    pub const BENCH_RATE: f64 = 2.0;

    pub fn component(shape_rate: f64, rate: f64) -> ComponentSpec {
        ComponentSpec {
            gamma: GammaParams { shape_rate, rate },
            failure_threshold: 6.0,
            corrective_cost: 80.0,
            preventive_cost: 30.0,
            downtime_cost_rate: 5.0,
            reward_floor: 2.0,
            reward_amplitude: 2.0,
            reward_decay: 20.0,
        }
    }

    fn system(components: Vec<ComponentSpec>) -> SystemSpec {
        SystemSpec {
            components,
            nondegrading_rate: 0.025,
            delay: 0.5,
            nondegrading_corrective_cost: 80.0,
            nondegrading_downtime_cost_rate: 5.0,
            inspection_cost: 10.0,
        }
    }

    /// `m` identical components with shape rate 1.25.
    pub fn identical(m: usize) -> SystemSpec {
        system((0..m).map(|_| component(1.25, BENCH_RATE)).collect())
    }

    /// `m` components with shape rates 1.1, 1.2, 1.3, …
    pub fn graded(m: usize) -> SystemSpec {
        system((0..m).map(|i| component(1.1 + 0.1 * i as f64, BENCH_RATE)).collect())
    }
}
