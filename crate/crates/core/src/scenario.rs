//! Versioned JSON scenario files and effort presets.
//!
//! Field names carry their units (`_time_units`, `_per_time_unit`); costs are
//! plain money units. A component entry may stand for several identical
//! components through `count`, and gives its gamma law through either `rate`
//! or `scale` (`scale = 1 / rate`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::GammaParams;
use crate::model::{ComponentSpec, ConstraintSpec, PolicyVector, StartState, SystemSpec};
use crate::opt::{GeneticParams, OptConfig, PatternParams};
use crate::sensitivity::SensitivityPlan;
use crate::sim::SimConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Simulation effort levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffortPreset {
    Quick,
    #[default]
    Standard,
    /// At least 10⁵ post-warmup cycles per estimate.
    Paper,
}

impl EffortPreset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(EffortPreset::Quick),
            "standard" => Ok(EffortPreset::Standard),
            "paper" => Ok(EffortPreset::Paper),
            _ => Err(Error::Config(format!("unknown effort '{s}' (quick, standard, paper)"))),
        }
    }

    /// Full-effort simulation settings.
    pub fn sim(self) -> SimConfig {
        let (horizon_cycles, replications) = match self {
            EffortPreset::Quick => (600, 10),
            EffortPreset::Standard => (2600, 20),
            EffortPreset::Paper => (5100, 20),
        };
        SimConfig { horizon_cycles, replications, ..SimConfig::default() }
    }

    /// Optimizer settings: budget, seed samples and the reduced search/seed efforts.
    pub fn opt(self) -> OptConfig {
        let (budget, seed_samples, search, seed) = match self {
            EffortPreset::Quick => (40, 8, (300, 4), (150, 2)),
            EffortPreset::Standard => (100, 20, (1100, 10), (300, 4)),
            EffortPreset::Paper => (160, 30, (2100, 10), (600, 4)),
        };
        let reduced = |(h, r): (usize, usize)| SimConfig {
            horizon_cycles: h,
            replications: r,
            warmup_cycles: 50,
            ..SimConfig::default()
        };
        OptConfig {
            budget,
            seed_samples,
            sim: self.sim(),
            search_sim: reduced(search),
            seed_sim: reduced(seed),
            ..OptConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    #[serde(default = "one")]
    pub count: usize,
    pub shape_rate_per_time_unit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub failure_threshold: f64,
    pub corrective_cost: f64,
    pub preventive_cost: f64,
    pub downtime_cost_per_time_unit: f64,
    pub reward_floor_per_time_unit: f64,
    pub reward_amplitude_per_time_unit: f64,
    pub reward_decay: f64,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub components: Vec<ComponentEntry>,
    pub nondegrading_failure_rate_per_time_unit: f64,
    pub delay_time_units: f64,
    pub nondegrading_corrective_cost: f64,
    pub nondegrading_downtime_cost_per_time_unit: f64,
    pub inspection_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub inspection_period_time_units: f64,
    /// One value per component, or a single value shared by all.
    pub preventive_thresholds: Vec<f64>,
}

/// Overrides of the effort preset; absent fields keep the preset's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationEntry {
    pub grid_step_time_units: Option<f64>,
    pub horizon_cycles: Option<usize>,
    pub replications: Option<usize>,
    pub warmup_cycles: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationEntry {
    pub method: Option<String>,
    pub budget: Option<usize>,
    pub seed_samples: Option<usize>,
    pub max_inspection_period_time_units: Option<f64>,
    pub shared_threshold: Option<bool>,
    pub search_horizon_cycles: Option<usize>,
    pub search_replications: Option<usize>,
    pub pattern: Option<PatternParams>,
    pub genetic: Option<GeneticParams>,
    /// Starting policy; replaces the random seed phase when given.
    pub start: Option<PolicyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationEntry {
    /// Start levels; omitted means a renewal start.
    pub start_levels: Option<Vec<f64>>,
    pub time_to_inspection_time_units: Option<f64>,
    pub cycles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalCurveEntry {
    pub delays_time_units: Vec<f64>,
    /// Nested prefixes of the component list to evaluate.
    pub m_values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardCurveEntry {
    pub horizon_time_units: f64,
    pub points: usize,
    pub paths: usize,
    /// Shape rates applied to the first component, one curve each.
    pub shape_rates_per_time_unit: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesEntry {
    pub critical: Option<CriticalCurveEntry>,
    pub reward: Option<RewardCurveEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityEntry {
    pub plans: Vec<SensitivityPlan>,
    /// Baseline optima per `m`; computed when absent.
    #[serde(default)]
    pub baselines: Vec<BaselineEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineEntry {
    pub m: usize,
    pub policy: PolicyEntry,
}

/// A scenario document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub effort: Option<EffortPreset>,
    pub system: SystemEntry,
    #[serde(default)]
    pub policy: Option<PolicyEntry>,
    #[serde(default)]
    pub simulation: SimulationEntry,
    #[serde(default)]
    pub optimization: OptimizationEntry,
    #[serde(default)]
    pub constraint: Option<ConstraintSpec>,
    #[serde(default)]
    pub validation: Option<ValidationEntry>,
    #[serde(default)]
    pub curves: CurvesEntry,
    #[serde(default)]
    pub sensitivity: Option<SensitivityEntry>,
}

/// Everything a command needs, with presets and overrides applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub name: String,
    pub effort: EffortPreset,
    pub seed: u64,
    pub system: SystemSpec,
    pub policy: Option<PolicyVector>,
    pub sim: SimConfig,
    pub opt: OptConfig,
    pub opt_start: Option<PolicyVector>,
    pub validation_start: Option<StartState>,
    pub validation_cycles: Option<usize>,
    pub curves: CurvesEntry,
    pub sensitivity: Option<SensitivityEntry>,
    pub warnings: Vec<String>,
}

impl ScenarioFile {
    /// Parses a document; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "scenario: unsupported schema_version {} (expected {SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn system(&self) -> Result<SystemSpec> {
        let mut components = Vec::new();
        for (i, c) in self.system.components.iter().enumerate() {
            let at = |msg: String| Error::InvalidModel(format!("system.components[{i}]: {msg}"));
            let gamma = match (c.rate, c.scale) {
                (Some(rate), None) => GammaParams { shape_rate: c.shape_rate_per_time_unit, rate },
                (None, Some(scale)) => {
                    GammaParams::from_scale(c.shape_rate_per_time_unit, scale).map_err(|e| at(e.to_string()))?
                }
                _ => return Err(at("give exactly one of `rate` and `scale`".into())),
            };
            if c.count == 0 {
                return Err(at("count must be at least 1".into()));
            }
            let spec = ComponentSpec {
                gamma,
                failure_threshold: c.failure_threshold,
                corrective_cost: c.corrective_cost,
                preventive_cost: c.preventive_cost,
                downtime_cost_rate: c.downtime_cost_per_time_unit,
                reward_floor: c.reward_floor_per_time_unit,
                reward_amplitude: c.reward_amplitude_per_time_unit,
                reward_decay: c.reward_decay,
            };
            spec.validate().map_err(|e| at(e.to_string()))?;
            components.extend(std::iter::repeat_n(spec, c.count));
        }
        let s = &self.system;
        Ok(SystemSpec {
            components,
            nondegrading_rate: s.nondegrading_failure_rate_per_time_unit,
            delay: s.delay_time_units,
            nondegrading_corrective_cost: s.nondegrading_corrective_cost,
            nondegrading_downtime_cost_rate: s.nondegrading_downtime_cost_per_time_unit,
            inspection_cost: s.inspection_cost,
        })
    }

    /// Applies the effort preset (the file's unless `effort` overrides it), the
    /// file's explicit settings and finally `seed`, then re-checks every invariant.
    pub fn resolve(&self, effort: Option<EffortPreset>, seed: Option<u64>) -> Result<Resolved> {
        let system = self.system()?;
        let mut warnings = system.validate().map_err(|e| Error::InvalidModel(format!("system: {e}")))?;
        let effort = effort.or(self.effort).unwrap_or_default();
        let sim_e = &self.simulation;
        let seed = seed.or(sim_e.seed).unwrap_or(0);

        let mut sim = effort.sim();
        if let Some(v) = sim_e.grid_step_time_units {
            sim.grid_step = v;
        }
        if let Some(v) = sim_e.horizon_cycles {
            sim.horizon_cycles = v;
        }
        if let Some(v) = sim_e.replications {
            sim.replications = v;
        }
        if let Some(v) = sim_e.warmup_cycles {
            sim.warmup_cycles = v;
        }
        if system.delay > 0.0 && sim.grid_step > system.delay / 5.0 {
            // The preset grid must resolve the delay; an explicit one is checked below.
            if sim_e.grid_step_time_units.is_none() {
                sim.grid_step = system.delay / 5.0;
            }
        }
        sim.base_seed = seed;
        sim.validate_for(&system).map_err(|e| Error::Config(format!("simulation: {e}")))?;

        let o = &self.optimization;
        let mut opt = effort.opt();
        opt.sim = sim.clone();
        for cfg in [&mut opt.search_sim, &mut opt.seed_sim] {
            cfg.grid_step = sim.grid_step;
            cfg.base_seed = seed;
        }
        if let Some(v) = &o.method {
            opt.method = v.clone();
        }
        if let Some(v) = o.budget {
            opt.budget = v;
        }
        if let Some(v) = o.seed_samples {
            opt.seed_samples = v;
        }
        opt.t_max = o.max_inspection_period_time_units;
        if let Some(v) = o.shared_threshold {
            opt.shared_threshold = v;
        }
        if let Some(v) = o.search_horizon_cycles {
            opt.search_sim.horizon_cycles = v;
        }
        if let Some(v) = o.search_replications {
            opt.search_sim.replications = v;
        }
        if let Some(v) = &o.pattern {
            opt.pattern = v.clone();
        }
        if let Some(v) = &o.genetic {
            opt.genetic = v.clone();
        }
        if let Some(c) = self.constraint {
            opt.constraint = c;
        }
        opt.seed = seed;
        opt.validate().map_err(|e| Error::Config(format!("optimization: {e}")))?;

        let policy = self
            .policy
            .as_ref()
            .map(|p| policy_of(p, &system, "policy", &mut warnings))
            .transpose()?;
        let opt_start = o
            .start
            .as_ref()
            .map(|p| policy_of(p, &system, "optimization.start", &mut warnings))
            .transpose()?;

        let (validation_start, validation_cycles) = match &self.validation {
            Some(v) => {
                let p = policy
                    .as_ref()
                    .ok_or_else(|| Error::Config("validation: a policy is required".into()))?;
                let mut st = StartState::renewal(&system, p);
                if let Some(l) = &v.start_levels {
                    st.levels = l.clone();
                }
                if let Some(w) = v.time_to_inspection_time_units {
                    st.time_to_inspection = w;
                }
                st.validate(&system, p).map_err(|e| Error::InvalidModel(format!("validation: {e}")))?;
                if v.cycles == 0 {
                    return Err(Error::Config("validation: cycles must be positive".into()));
                }
                (Some(st), Some(v.cycles))
            }
            None => (None, None),
        };

        if let Some(c) = &self.curves.critical {
            if c.m_values.iter().any(|&m| m == 0 || m > system.m()) {
                return Err(Error::Config(format!(
                    "curves.critical: m values must lie in 1..={} (the component count)",
                    system.m()
                )));
            }
            if c.delays_time_units.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(Error::Config("curves.critical: delays must be non-negative".into()));
            }
        }
        if let Some(r) = &self.curves.reward {
            if !(r.horizon_time_units > 0.0) || r.points == 0 || r.paths == 0 {
                return Err(Error::Config("curves.reward: horizon, points and paths must be positive".into()));
            }
        }
        if let Some(sens) = &self.sensitivity {
            for (i, plan) in sens.plans.iter().enumerate() {
                plan.validate(&system).map_err(|e| Error::Config(format!("sensitivity.plans[{i}]: {e}")))?;
            }
        }

        Ok(Resolved {
            name: self.name.clone(),
            effort,
            seed,
            system,
            policy,
            sim,
            opt,
            opt_start,
            validation_start,
            validation_cycles,
            curves: self.curves.clone(),
            sensitivity: self.sensitivity.clone(),
            warnings,
        })
    }
}

/// Expands a policy entry against a system (broadcasting a single threshold).
pub fn policy_of(p: &PolicyEntry, s: &SystemSpec, at: &str, warnings: &mut Vec<String>) -> Result<PolicyVector> {
    let m = s.m();
    let thresholds = match p.preventive_thresholds.len() {
        1 => vec![p.preventive_thresholds[0]; m],
        n if n == m => p.preventive_thresholds.clone(),
        n => {
            return Err(Error::InvalidModel(format!("{at}: {n} preventive thresholds given for {m} components")))
        }
    };
    let policy = PolicyVector::new(p.inspection_period_time_units, thresholds);
    warnings.extend(policy.validate(s).map_err(|e| Error::InvalidModel(format!("{at}: {e}")))?);
    Ok(policy)
}

impl PolicyEntry {
    pub fn from_policy(p: &PolicyVector) -> Self {
        PolicyEntry { inspection_period_time_units: p.inspection_period, preventive_thresholds: p.preventive_thresholds.clone() }
    }
}

/// A ready-made scenario: `m` identical benchmark components (shape rate 1.25,
/// scale 0.5) at policy `(4.317, 3.075)`.
pub fn benchmark(m: usize) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: format!("identical-{m}"),
        effort: None,
        system: SystemEntry {
            components: vec![ComponentEntry {
                count: m,
                shape_rate_per_time_unit: 1.25,
                rate: None,
                scale: Some(0.5),
                failure_threshold: 6.0,
                corrective_cost: 80.0,
                preventive_cost: 30.0,
                downtime_cost_per_time_unit: 5.0,
                reward_floor_per_time_unit: 2.0,
                reward_amplitude_per_time_unit: 2.0,
                reward_decay: 20.0,
            }],
            nondegrading_failure_rate_per_time_unit: 0.025,
            delay_time_units: 0.5,
            nondegrading_corrective_cost: 80.0,
            nondegrading_downtime_cost_per_time_unit: 5.0,
            inspection_cost: 10.0,
        },
        policy: Some(PolicyEntry { inspection_period_time_units: 4.317, preventive_thresholds: vec![3.075] }),
        simulation: SimulationEntry::default(),
        optimization: OptimizationEntry { shared_threshold: Some(true), ..Default::default() },
        constraint: Some(ConstraintSpec { safety_limit: 0.05 }),
        validation: None,
        curves: CurvesEntry::default(),
        sensitivity: None,
    }
}
