//! One-at-a-time parameter perturbation of the optimal cost rate.
//!
//! For every number of components `m` and every grid value of the perturbed
//! parameter the policy is re-optimized (starting from the baseline optimum)
//! and the relative variation `V = |C_base − C_cell| / C_base` is reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PolicyVector, SystemSpec};
use crate::opt::{optimize, OptConfig};
use crate::stats::EstimateWithError;

/// Perturbed parameter. `Scale` is the gamma scale `1/β_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameter {
    Alpha,
    #[serde(alias = "beta")]
    Scale,
    Lambda,
}

impl Parameter {
    pub fn label(self) -> &'static str {
        match self {
            Parameter::Alpha => "alpha",
            Parameter::Scale => "scale",
            Parameter::Lambda => "lambda",
        }
    }

    /// Value of the parameter in a system (read from the first component).
    pub fn value_in(self, s: &SystemSpec) -> f64 {
        match self {
            Parameter::Alpha => s.components[0].gamma.shape_rate,
            Parameter::Scale => 1.0 / s.components[0].gamma.rate,
            Parameter::Lambda => s.nondegrading_rate,
        }
    }

    /// Copy of `s` with the parameter set to `v` on every component.
    pub fn apply(self, s: &SystemSpec, v: f64) -> SystemSpec {
        let mut out = s.clone();
        match self {
            Parameter::Alpha => out.components.iter_mut().for_each(|c| c.gamma.shape_rate = v),
            Parameter::Scale => out.components.iter_mut().for_each(|c| c.gamma.rate = 1.0 / v),
            Parameter::Lambda => out.nondegrading_rate = v,
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPlan {
    pub parameter: Parameter,
    /// Must contain the baseline value.
    pub grid: Vec<f64>,
    pub m_values: Vec<usize>,
}

impl SensitivityPlan {
    pub fn validate(&self, template: &SystemSpec) -> Result<()> {
        if self.grid.is_empty() || self.m_values.is_empty() {
            return Err(Error::Config("sensitivity grid and m values must be non-empty".into()));
        }
        if self.grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("sensitivity grid values must be positive: {:?}", self.grid)));
        }
        if self.m_values.contains(&0) {
            return Err(Error::Config("m values must be positive".into()));
        }
        let base = self.parameter.value_in(template);
        if !self.grid.iter().any(|v| is_baseline(*v, base)) {
            return Err(Error::Config(format!(
                "{} grid {:?} does not contain the baseline value {base}",
                self.parameter.label(),
                self.grid
            )));
        }
        Ok(())
    }
}

fn is_baseline(v: f64, base: f64) -> bool {
    (v - base).abs() <= 1e-9 * base.abs().max(1.0)
}

/// `m` copies of the template's first component.
pub fn system_with_m(template: &SystemSpec, m: usize) -> SystemSpec {
    SystemSpec { components: vec![template.components[0].clone(); m], ..template.clone() }
}

/// Optimum of the unperturbed problem for one `m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Baseline {
    pub m: usize,
    pub policy: PolicyVector,
    pub cost: EstimateWithError,
    pub feasible: bool,
}

pub fn baseline_optimum(template: &SystemSpec, m: usize, opt: &OptConfig) -> Result<Baseline> {
    let s = system_with_m(template, m);
    let (policy, r) = optimize(&s, opt, None)?;
    Ok(Baseline { m, policy, cost: r.best_cost, feasible: r.feasible })
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityCell {
    pub m: usize,
    pub parameter: Parameter,
    pub value: f64,
    /// `None` when the perturbed problem has no feasible optimum.
    pub v: Option<f64>,
    /// Standard error of `V` from the two cost estimates, ignoring optimizer noise.
    pub std_error_proxy: f64,
    pub cost: EstimateWithError,
    pub policy: PolicyVector,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityTable {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
    pub cells: Vec<SensitivityCell>,
}

impl SensitivityTable {
    /// Largest `V` among feasible cells for one `m`.
    pub fn max_v(&self, m: usize) -> Option<f64> {
        self.cells.iter().filter(|c| c.m == m).filter_map(|c| c.v).reduce(f64::max)
    }

    pub fn cell(&self, m: usize, value: f64) -> Option<&SensitivityCell> {
        self.cells.iter().find(|c| c.m == m && is_baseline(c.value, value))
    }

    /// Rows `m`, columns grid values; infeasible cells shown as `infeas.`.
    pub fn render(&self) -> String {
        let mut out = format!("{:>4} |", format!("m\\{}", &self.parameter.label()[..1]));
        for v in &self.grid {
            out += &format!(" {v:>8.3}");
        }
        out.push('\n');
        out += &"-".repeat(6 + 9 * self.grid.len());
        out.push('\n');
        let mut ms: Vec<usize> = self.cells.iter().map(|c| c.m).collect();
        ms.dedup();
        for m in ms {
            out += &format!("{m:>4} |");
            for v in &self.grid {
                match self.cell(m, *v).and_then(|c| c.v) {
                    Some(x) => out += &format!(" {x:>8.4}"),
                    None => out += &format!(" {:>8}", "infeas."),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every (m, value) cell of the plan. `baselines` must hold one entry per
/// planned `m`. Cells are re-optimized in parallel from the baseline policy with
/// per-cell strategy seeds; simulation seeds are shared so cells are compared
/// under common random numbers.
pub fn run_sensitivity(
    template: &SystemSpec,
    plan: &SensitivityPlan,
    opt: &OptConfig,
    baselines: &[Baseline],
) -> Result<SensitivityTable> {
    plan.validate(template)?;
    let base_value = plan.parameter.value_in(template);
    let mut jobs = Vec::new();
    for &m in &plan.m_values {
        let b = baselines
            .iter()
            .find(|b| b.m == m)
            .ok_or_else(|| Error::Config(format!("no baseline optimum supplied for m = {m}")))?;
        for &v in &plan.grid {
            jobs.push((b, v));
        }
    }
    let cells = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (b, v))| {
            if is_baseline(*v, base_value) {
                return Ok(SensitivityCell {
                    m: b.m,
                    parameter: plan.parameter,
                    value: *v,
                    v: Some(0.0),
                    std_error_proxy: 0.0,
                    cost: b.cost,
                    policy: b.policy.clone(),
                    feasible: b.feasible,
                });
            }
            let s = plan.parameter.apply(&system_with_m(template, b.m), *v);
            let cfg = OptConfig { seed: opt.seed.wrapping_add(i as u64 + 1), ..opt.clone() };
            let (policy, r) = optimize(&s, &cfg, Some(&b.policy))?;
            let c0 = b.cost.mean;
            let rel = (c0 - r.best_cost.mean).abs() / c0;
            let se = (b.cost.std_error.powi(2) + r.best_cost.std_error.powi(2)).sqrt() / c0;
            Ok(SensitivityCell {
                m: b.m,
                parameter: plan.parameter,
                value: *v,
                v: r.feasible.then_some(rel),
                std_error_proxy: se,
                cost: r.best_cost,
                policy,
                feasible: r.feasible,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityTable { parameter: plan.parameter, grid: plan.grid.clone(), cells })
}
