use std::path::PathBuf;

use serde::Serialize;

use gammacbm::crosscheck::{cross_check, render, Comparison};
use gammacbm::model::{PolicyVector, StartState, SystemSpec};
use gammacbm::opt::{optimize as run_optimizer, policy_from, OptResult};
use gammacbm::scenario::{policy_of, EffortPreset, Resolved, ScenarioFile};
use gammacbm::sensitivity::{baseline_optimum, run_sensitivity, system_with_m, Baseline, SensitivityTable};
use gammacbm::sim::{critical_probability_curve, estimate_cost_rate, reward_rate_curve, CostRateEstimate};
use gammacbm::ComponentSpec;

use crate::output::Bundle;
use crate::{Common, Failure};

pub struct Context {
    pub scenario: ScenarioFile,
    pub resolved: Resolved,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn load(c: &Common, effort: Option<EffortPreset>) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(&c.scenario)
            .map_err(|e| Failure::Input(format!("{}: {e}", c.scenario.display())))?;
        let scenario = ScenarioFile::from_json(&text)?;
        let resolved = scenario.resolve(effort, c.seed)?;
        for w in &resolved.warnings {
            log::warn!("{w}");
        }
        Ok(Context { scenario, resolved, out: c.out.clone() })
    }

    fn policy(&self) -> Result<&PolicyVector, Failure> {
        self.resolved.policy.as_ref().ok_or_else(|| Failure::Input("scenario has no policy".into()))
    }

    fn document<'a, T: Serialize>(&'a self, command: &'a str, result: T) -> Document<'a, T> {
        Document {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.resolved.seed,
            scenario: &self.scenario,
            resolved: &self.resolved,
            result,
        }
    }
}

/// Envelope of every JSON result: enough to rerun the command bit-identically.
#[derive(Serialize)]
struct Document<'a, T> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    scenario: &'a ScenarioFile,
    resolved: &'a Resolved,
    result: T,
}

#[derive(Serialize)]
struct QuantityRow<'a> {
    quantity: &'a str,
    estimate: f64,
    std_error: Option<f64>,
    seed: u64,
}

pub fn simulate(ctx: &Context) -> Result<(), Failure> {
    let p = ctx.policy()?;
    let s = &ctx.resolved.system;
    let e: CostRateEstimate = estimate_cost_rate(s, p, &ctx.resolved.sim)?;
    if e.mu >= 1.0 {
        println!("WARNING: stability bound mu = {:.6} is not below 1; the stationary regime is not guaranteed", e.mu);
    }
    println!("cost rate            {:.4} ± {:.4}", e.cost_rate.mean, e.cost_rate.std_error);
    println!("critical probability {:.5} ± {:.5}", e.critical_probability.mean, e.critical_probability.std_error);
    println!("mean cycle length    {:.4} ± {:.4}", e.mean_cycle_length.mean, e.mean_cycle_length.std_error);
    println!("cycles               {}", e.cycles);

    let seed = ctx.resolved.seed;
    let b = &e.breakdown_rates;
    let with_se = [
        ("cost_rate", e.cost_rate),
        ("critical_probability", e.critical_probability),
        ("mean_cycle_length", e.mean_cycle_length),
    ];
    let plain = [
        ("preventive_rate", b.preventive),
        ("corrective_degrading_rate", b.corrective_degrading),
        ("corrective_nondegrading_rate", b.corrective_nondegrading),
        ("inspection_rate", b.inspections),
        ("downtime_rate", b.downtime),
        ("reward_rate", b.reward),
        ("cycles", e.cycles as f64),
        ("mu", e.mu),
    ];
    let mut rows: Vec<QuantityRow> = with_se
        .iter()
        .map(|(q, v)| QuantityRow { quantity: q, estimate: v.mean, std_error: Some(v.std_error), seed })
        .collect();
    rows.extend(plain.iter().map(|(q, v)| QuantityRow { quantity: q, estimate: *v, std_error: None, seed }));

    let mut out = Bundle::default();
    out.json("simulate.json", &ctx.document("simulate", &e))?;
    out.csv("simulate.csv", &rows)?;
    out.write(ctx.out.as_deref())
}

#[derive(Serialize)]
struct OptimizeResult<'a> {
    best_policy: &'a PolicyVector,
    optimizer: &'a OptResult,
}

#[derive(Serialize)]
struct TraceRow {
    index: usize,
    inspection_period: f64,
    preventive_thresholds: String,
    cost: f64,
    constraint: f64,
    feasible: bool,
    seed: u64,
}

pub fn optimize(ctx: &Context) -> Result<(), Failure> {
    let r = &ctx.resolved;
    let (best, res) = run_optimizer(&r.system, &r.opt, r.opt_start.as_ref())?;
    println!("method               {}", res.method);
    println!(
        "best policy          T = {:.4}, M = {}",
        best.inspection_period,
        join(&best.preventive_thresholds)
    );
    println!("cost rate            {:.4} ± {:.4}", res.best_cost.mean, res.best_cost.std_error);
    println!("critical probability {:.5} ± {:.5}", res.constraint_value.mean, res.constraint_value.std_error);
    println!("feasible             {}", res.feasible);
    println!("evaluations          {}", res.trace.len());

    let rows: Vec<TraceRow> = res
        .trace
        .iter()
        .map(|t| {
            let p = policy_from(&r.system, r.opt.shared_threshold, &t.x);
            TraceRow {
                index: t.index,
                inspection_period: p.inspection_period,
                preventive_thresholds: join(&p.preventive_thresholds),
                cost: t.cost,
                constraint: t.constraint,
                feasible: t.feasible,
                seed: r.seed,
            }
        })
        .collect();
    let mut out = Bundle::default();
    out.json("optimize.json", &ctx.document("optimize", OptimizeResult { best_policy: &best, optimizer: &res }))?;
    out.csv("optimize_trace.csv", &rows)?;
    out.write(ctx.out.as_deref())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct ValidateResult<'a> {
    start: &'a StartState,
    cycles: usize,
    comparisons: &'a [Comparison],
    max_abs_z: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ComparisonRow<'a> {
    quantity: &'a str,
    oracle: f64,
    estimate: f64,
    std_error: f64,
    z: f64,
    seed: u64,
}

pub fn validate(ctx: &Context) -> Result<(), Failure> {
    let r = &ctx.resolved;
    let p = ctx.policy()?;
    let start = r.validation_start.clone().unwrap_or_else(|| StartState::renewal(&r.system, p));
    let cycles = r.validation_cycles.unwrap_or_else(|| r.sim.post_warmup_cycles());
    let rows = cross_check(&r.system, p, &start, cycles, &r.sim)?;
    print!("{}", render(&rows));
    let max_abs_z = rows.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    let passed = max_abs_z <= 3.0;
    println!("max |z| = {max_abs_z:.3} over {} quantities: {}", rows.len(), if passed { "PASS" } else { "FAIL" });

    let csv_rows: Vec<ComparisonRow> = rows
        .iter()
        .map(|c| ComparisonRow {
            quantity: &c.quantity,
            oracle: c.oracle,
            estimate: c.estimate.mean,
            std_error: c.estimate.std_error,
            z: c.z,
            seed: r.seed,
        })
        .collect();
    let mut out = Bundle::default();
    let result = ValidateResult { start: &start, cycles, comparisons: &rows, max_abs_z, passed };
    out.json("validate.json", &ctx.document("validate", result))?;
    out.csv("validate.csv", &csv_rows)?;
    out.write(ctx.out.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

#[derive(Serialize, Clone)]
struct CurveRow {
    curve: &'static str,
    series: String,
    x: f64,
    estimate: Option<f64>,
    std_error: Option<f64>,
    note: String,
    seed: u64,
}

pub fn curves(ctx: &Context) -> Result<(), Failure> {
    let r = &ctx.resolved;
    if r.curves.critical.is_none() && r.curves.reward.is_none() {
        return Err(Failure::Input("scenario defines no curves".into()));
    }
    let mut critical = Vec::new();
    if let Some(c) = &r.curves.critical {
        let p = ctx.policy()?;
        for &m in &c.m_values {
            let sub = SystemSpec { components: r.system.components[..m].to_vec(), ..r.system.clone() };
            let sp = PolicyVector::new(p.inspection_period, p.preventive_thresholds[..m].to_vec());
            for (tau, pt) in c.delays_time_units.iter().zip(critical_probability_curve(&sub, &sp, &c.delays_time_units, &r.sim)) {
                let (estimate, std_error, note) = match pt {
                    Ok(pt) => (Some(pt.estimate.mean), Some(pt.estimate.std_error), String::new()),
                    Err(gammacbm::Error::InvalidModel(msg)) => (None, None, msg),
                    Err(e) => return Err(e.into()),
                };
                critical.push(CurveRow {
                    curve: "critical-probability",
                    series: format!("m={m}"),
                    x: *tau,
                    estimate,
                    std_error,
                    note,
                    seed: r.seed,
                });
            }
        }
    }
    let mut reward = Vec::new();
    if let Some(c) = &r.curves.reward {
        for &a in &c.shape_rates_per_time_unit {
            let mut comp: ComponentSpec = r.system.components[0].clone();
            comp.gamma.shape_rate = a;
            for pt in reward_rate_curve(&comp, c.horizon_time_units, c.points, c.paths, &r.sim)? {
                reward.push(CurveRow {
                    curve: "reward-rate",
                    series: format!("alpha={a}"),
                    x: pt.x,
                    estimate: Some(pt.estimate.mean),
                    std_error: Some(pt.estimate.std_error),
                    note: String::new(),
                    seed: r.seed,
                });
            }
        }
    }
    println!("{} critical-probability points, {} reward-rate points", critical.len(), reward.len());
    let mut out = Bundle::default();
    let all: Vec<CurveRow> = critical.iter().chain(&reward).cloned().collect();
    out.json("curves.json", &ctx.document("curves", &all))?;
    if !critical.is_empty() {
        out.csv("critical_curve.csv", &critical)?;
    }
    if !reward.is_empty() {
        out.csv("reward_curve.csv", &reward)?;
    }
    out.write(ctx.out.as_deref())
}

#[derive(Serialize)]
struct SensitivityRow<'a> {
    m: usize,
    parameter: &'a str,
    value: f64,
    #[serde(rename = "V")]
    v: Option<f64>,
    std_error_proxy: f64,
    feasible: bool,
    seed: u64,
}

#[derive(Serialize)]
struct SensitivityResult<'a> {
    baselines: &'a [Baseline],
    tables: &'a [SensitivityTable],
}

pub fn sensitivity(ctx: &Context) -> Result<(), Failure> {
    let r = &ctx.resolved;
    let sens = r.sensitivity.as_ref().ok_or_else(|| Failure::Input("scenario has no sensitivity section".into()))?;
    let mut ms: Vec<usize> = sens.plans.iter().flat_map(|p| p.m_values.iter().copied()).collect();
    ms.sort_unstable();
    ms.dedup();
    let mut baselines = Vec::new();
    for m in ms {
        let b = match sens.baselines.iter().find(|b| b.m == m) {
            Some(entry) => {
                let s = system_with_m(&r.system, m);
                let mut warnings = Vec::new();
                let policy = policy_of(&entry.policy, &s, "sensitivity.baselines", &mut warnings)?;
                let e = estimate_cost_rate(&s, &policy, &r.opt.sim)?;
                let feasible = e.critical_probability.mean <= r.opt.constraint.safety_limit;
                Baseline { m, policy, cost: e.cost_rate, feasible }
            }
            None => baseline_optimum(&r.system, m, &r.opt)?,
        };
        println!("baseline m={m}: cost {:.4} ± {:.4}", b.cost.mean, b.cost.std_error);
        baselines.push(b);
    }
    let mut tables = Vec::new();
    for plan in &sens.plans {
        tables.push(run_sensitivity(&r.system, plan, &r.opt, &baselines)?);
    }
    let mut text = String::new();
    let mut rows = Vec::new();
    for t in &tables {
        text += &format!("V for {}\n{}\n", t.parameter.label(), t.render());
        for c in &t.cells {
            rows.push(SensitivityRow {
                m: c.m,
                parameter: t.parameter.label(),
                value: c.value,
                v: c.v,
                std_error_proxy: c.std_error_proxy,
                feasible: c.feasible,
                seed: r.seed,
            });
        }
    }
    print!("{text}");
    let mut out = Bundle::default();
    out.json("sensitivity.json", &ctx.document("sensitivity", SensitivityResult { baselines: &baselines, tables: &tables }))?;
    out.csv("sensitivity.csv", &rows)?;
    out.text("sensitivity.txt", text);
    out.write(ctx.out.as_deref())
}
