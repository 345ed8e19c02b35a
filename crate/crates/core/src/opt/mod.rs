//! Constrained policy search: minimize the simulated cost rate over
//! `(T, M_1, …, M_m)` subject to a bound on the critical-situation probability.
//!
//! Candidates are compared by feasibility dominance: a feasible point beats an
//! infeasible one, feasible points are ranked by cost and infeasible points by
//! how far they exceed the bound. All search-time evaluations reuse one seed
//! (common random numbers); the returned optimum is re-evaluated at full effort.

mod genetic;
mod pattern;
mod registry;
mod seed;

pub use genetic::{GeneticParams, GeneticSearch};
pub use pattern::{PatternParams, PatternSearch};
pub use registry::{Registry, SearchStrategy};
pub use seed::seed_search;

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintSpec, PolicyVector, SystemSpec};
use crate::sim::{estimate_cost_rate, SimConfig};
use crate::stats::EstimateWithError;

/// Which simulation effort an evaluation should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    Seed,
    Search,
    Final,
}

/// Cost and constraint value of one candidate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Evaluation {
    pub cost: EstimateWithError,
    pub constraint: EstimateWithError,
}

/// Objective function over flat decision vectors.
pub trait Objective: Sync {
    fn evaluate(&self, x: &[f64], effort: Effort) -> Result<Evaluation>;
}

/// Box constraints; every evaluated point is clipped into `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Config("bounds must have matching, non-zero lengths".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Config(format!("inconsistent bounds {lower:?} / {upper:?}")));
        }
        Ok(Bounds { lower, upper })
    }

    /// `T ∈ (2τ, T_max]`, `M_i ∈ (0, L_i]`, with open ends moved inward by `1e-6`.
    /// With `shared_threshold`, a single `M` stands for every component.
    pub fn for_system(s: &SystemSpec, t_max: Option<f64>, shared_threshold: bool) -> Result<Self> {
        let t_max = t_max.unwrap_or_else(|| default_t_max(s));
        let t_lo = 2.0 * s.delay + 1e-6;
        if !(t_max > t_lo) {
            return Err(Error::Config(format!("upper bound {t_max} on T does not exceed 2τ = {}", 2.0 * s.delay)));
        }
        let mut lower = vec![t_lo];
        let mut upper = vec![t_max];
        if shared_threshold {
            lower.push(1e-6);
            upper.push(s.components.iter().map(|c| c.failure_threshold).fold(f64::INFINITY, f64::min));
        } else {
            for c in &s.components {
                lower.push(1e-6);
                upper.push(c.failure_threshold);
            }
        }
        Bounds::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(v, (l, u))| v.clamp(*l, *u)).collect()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// Twice the mean time for the fastest component to reach its failure threshold.
/// Longer periods almost never inspect before a failure, so the cost surface is
/// a flat, slightly rippled plateau out there.
pub fn default_t_max(s: &SystemSpec) -> f64 {
    2.0 * s.fastest_mean_failure_time()
}

/// Search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    /// Registered strategy name (`pattern-search` or `genetic` by default).
    pub method: String,
    /// Total number of search-time evaluations, seed samples included.
    pub budget: usize,
    pub seed_samples: usize,
    pub constraint: ConstraintSpec,
    /// Effort of the final re-evaluation.
    pub sim: SimConfig,
    /// Effort of search-time evaluations.
    pub search_sim: SimConfig,
    /// Effort of seed-sampling evaluations.
    pub seed_sim: SimConfig,
    /// Upper bound on `T`; defaults to [`default_t_max`].
    pub t_max: Option<f64>,
    /// Search a single preventive threshold shared by all components.
    pub shared_threshold: bool,
    /// Seed for the strategies' own randomness (sampling, selection, mutation).
    pub seed: u64,
    pub pattern: PatternParams,
    pub genetic: GeneticParams,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            method: "pattern-search".into(),
            budget: 120,
            seed_samples: 20,
            constraint: ConstraintSpec { safety_limit: 0.05 },
            sim: SimConfig::default(),
            search_sim: SimConfig { horizon_cycles: 600, replications: 10, ..SimConfig::default() },
            seed_sim: SimConfig { horizon_cycles: 300, replications: 4, warmup_cycles: 50, ..SimConfig::default() },
            t_max: None,
            shared_threshold: false,
            seed: 0,
            pattern: PatternParams::default(),
            genetic: GeneticParams::default(),
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        self.constraint.validate()?;
        if self.seed_samples == 0 {
            return Err(Error::Config("at least one seed sample is required".into()));
        }
        if self.budget < self.seed_samples {
            return Err(Error::Config(format!(
                "budget {} is smaller than the {} seed samples",
                self.budget, self.seed_samples
            )));
        }
        self.sim.validate()?;
        self.search_sim.validate()?;
        self.seed_sim.validate()?;
        self.pattern.validate()?;
        self.genetic.validate()
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub index: usize,
    pub x: Vec<f64>,
    pub cost: f64,
    pub constraint: f64,
    pub feasible: bool,
}

/// Thread-safe evaluation log shared by the seed phase and the strategy.
#[derive(Default)]
pub struct Trace {
    entries: Mutex<Vec<TraceEntry>>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("trace lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_entries(self) -> Vec<TraceEntry> {
        self.entries.into_inner().expect("trace lock")
    }
}

/// A point and its search-time evaluation.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub eval: Evaluation,
}

impl Candidate {
    fn violation(&self, limit: f64) -> f64 {
        (self.eval.constraint.mean - limit).max(0.0)
    }

    /// Feasibility dominance.
    pub fn better_than(&self, other: &Candidate, limit: f64) -> bool {
        let (va, vb) = (self.violation(limit), other.violation(limit));
        match (va == 0.0, vb == 0.0) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.eval.cost.mean < other.eval.cost.mean,
            (false, false) => va < vb,
        }
    }
}

/// Evaluation context handed to strategies: clips, evaluates and logs.
pub struct Evaluator<'a> {
    pub objective: &'a dyn Objective,
    pub bounds: &'a Bounds,
    pub trace: &'a Trace,
    pub limit: f64,
}

impl Evaluator<'_> {
    /// Evaluates the clipped points in parallel and logs them in input order.
    pub fn evaluate_all(&self, xs: &[Vec<f64>], effort: Effort) -> Result<Vec<Candidate>> {
        use rayon::prelude::*;
        let clipped: Vec<Vec<f64>> = xs.iter().map(|x| self.bounds.clip(x)).collect();
        let evals: Vec<Evaluation> =
            clipped.par_iter().map(|x| self.objective.evaluate(x, effort)).collect::<Result<_>>()?;
        let mut log = self.trace.entries.lock().expect("trace lock");
        let out = clipped
            .into_iter()
            .zip(evals)
            .map(|(x, eval)| {
                let index = log.len();
                log.push(TraceEntry {
                    index,
                    x: x.clone(),
                    cost: eval.cost.mean,
                    constraint: eval.constraint.mean,
                    feasible: eval.constraint.mean <= self.limit,
                });
                Candidate { x, eval }
            })
            .collect();
        Ok(out)
    }

    pub fn evaluate(&self, x: &[f64], effort: Effort) -> Result<Candidate> {
        Ok(self.evaluate_all(&[x.to_vec()], effort)?.remove(0))
    }

    pub fn best<'c>(&self, cs: &'c [Candidate]) -> Option<&'c Candidate> {
        cs.iter().fold(None, |acc: Option<&Candidate>, c| match acc {
            Some(b) if !c.better_than(b, self.limit) => Some(b),
            _ => Some(c),
        })
    }
}

/// Simulation-backed objective for a maintained system.
pub struct SimObjective<'a> {
    pub system: &'a SystemSpec,
    pub cfg: &'a OptConfig,
}

impl SimObjective<'_> {
    pub fn policy(&self, x: &[f64]) -> PolicyVector {
        policy_from(self.system, self.cfg.shared_threshold, x)
    }
}

/// Expands a flat decision vector into a policy (replicating a shared threshold if needed).
pub fn policy_from(s: &SystemSpec, shared: bool, x: &[f64]) -> PolicyVector {
    if shared {
        PolicyVector::new(x[0], vec![x[1]; s.m()])
    } else {
        PolicyVector::from_slice(x)
    }
}

impl Objective for SimObjective<'_> {
    fn evaluate(&self, x: &[f64], effort: Effort) -> Result<Evaluation> {
        let sim = match effort {
            Effort::Seed => &self.cfg.seed_sim,
            Effort::Search => &self.cfg.search_sim,
            Effort::Final => &self.cfg.sim,
        };
        let e = estimate_cost_rate(self.system, &self.policy(x), sim)?;
        Ok(Evaluation { cost: e.cost_rate, constraint: e.critical_probability })
    }
}

/// Deterministic objective built from closures, for exercising the strategies.
pub struct FnObjective<C, G> {
    pub cost: C,
    pub constraint: G,
}

impl<C, G> Objective for FnObjective<C, G>
where
    C: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, x: &[f64], _effort: Effort) -> Result<Evaluation> {
        Ok(Evaluation {
            cost: EstimateWithError::exact((self.cost)(x)),
            constraint: EstimateWithError::exact((self.constraint)(x)),
        })
    }
}

/// Outcome of a search.
#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub method: String,
    pub best_x: Vec<f64>,
    pub best_cost: EstimateWithError,
    pub constraint_value: EstimateWithError,
    pub feasible: bool,
    pub seed_x: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

/// Seeds, runs the configured strategy with the remaining budget and re-evaluates
/// the winner at full effort. `start` replaces the random seed phase when given.
pub fn optimize_with(
    objective: &dyn Objective,
    bounds: &Bounds,
    cfg: &OptConfig,
    registry: &Registry,
    start: Option<&[f64]>,
) -> Result<OptResult> {
    cfg.validate()?;
    let strategy = registry.get(&cfg.method)?;
    let limit = cfg.constraint.safety_limit;
    let trace = Trace::new();
    let ev = Evaluator { objective, bounds, trace: &trace, limit };
    let seed = match start {
        Some(x) => ev.evaluate(x, Effort::Search)?,
        None => seed_search(&ev, cfg)?,
    };
    let remaining = cfg.budget.saturating_sub(trace.len());
    let best = if remaining == 0 { seed.x.clone() } else { strategy.search(&ev, &seed, cfg, remaining)? };
    let fin = objective.evaluate(&best, Effort::Final)?;
    let feasible = fin.constraint.mean <= limit;
    Ok(OptResult {
        method: strategy.name().to_string(),
        best_x: best,
        best_cost: fin.cost,
        constraint_value: fin.constraint,
        feasible,
        seed_x: seed.x,
        trace: trace.into_entries(),
    })
}

/// Optimizes the maintenance policy of `s` by simulation.
pub fn optimize(s: &SystemSpec, cfg: &OptConfig, start: Option<&PolicyVector>) -> Result<(PolicyVector, OptResult)> {
    s.validate()?;
    let bounds = Bounds::for_system(s, cfg.t_max, cfg.shared_threshold)?;
    let objective = SimObjective { system: s, cfg };
    let x0 = start.map(|p| {
        if cfg.shared_threshold {
            vec![p.inspection_period, p.preventive_thresholds[0]]
        } else {
            p.to_vec()
        }
    });
    let r = optimize_with(&objective, &bounds, cfg, &Registry::with_defaults(), x0.as_deref())?;
    Ok((objective.policy(&r.best_x), r))
}
