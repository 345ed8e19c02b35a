//! Acceptance suite. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=1,7` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gammacbm::crosscheck::{cross_check, render};
use gammacbm::gamma::{first_passage_cdf, increment_cdf, sample_increment};
use gammacbm::model::presets;
use gammacbm::opt::{optimize, OptConfig, OptResult};
use gammacbm::scenario::EffortPreset;
use gammacbm::sensitivity::{run_sensitivity, Baseline, Parameter, SensitivityPlan, SensitivityTable};
use gammacbm::sim::{
    critical_probability_curve, estimate_cost_rate, reward_rate_curve, run_replications, Action, CurvePoint,
};
use gammacbm::{ComponentSpec, GammaParams, PolicyVector, SimConfig, StartState, SystemSpec};

const IDENTICAL_COST: f64 = 8.140;
const GRADED_COST: f64 = 4.968;
const GRADED_CRITICAL: f64 = 0.015;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Optimizer runs shared between criteria, keyed by `(m, replicate)`.
#[derive(Default)]
struct Shared {
    identical: BTreeMap<(usize, u64), (PolicyVector, OptResult)>,
}

/// Independent optimizer runs per `m` used to put a standard error on the optimal `T`.
const REPLICATES: u64 = 3;

/// Full effort: 20 × 5000 = 10⁵ post-warmup cycles.
fn full_sim(seed: u64) -> SimConfig {
    SimConfig { base_seed: seed, ..EffortPreset::Paper.sim() }
}

fn opt_config(method: &str, shared_threshold: bool, seed: u64) -> OptConfig {
    let mut o = EffortPreset::Standard.opt();
    o.method = method.into();
    o.shared_threshold = shared_threshold;
    o.sim = full_sim(seed);
    o.search_sim.base_seed = seed;
    o.seed_sim.base_seed = seed;
    o.seed = seed;
    o
}

fn fmt_policy(p: &PolicyVector) -> String {
    let ms: Vec<String> = p.preventive_thresholds.iter().map(|m| format!("{m:.3}")).collect();
    format!("(T={:.3}, M=[{}])", p.inspection_period, ms.join(", "))
}

fn identical_run(sh: &mut Shared, m: usize, replicate: u64) -> (PolicyVector, OptResult) {
    sh.identical
        .entry((m, replicate))
        .or_insert_with(|| {
            let seed = 1000 + m as u64 + 100 * replicate;
            optimize(&presets::identical(m), &opt_config("pattern-search", true, seed), None)
                .expect("pattern search runs")
        })
        .clone()
}

fn identical_optimum(sh: &mut Shared, m: usize) -> (PolicyVector, OptResult) {
    identical_run(sh, m, 0)
}

fn c1_benchmark_cost(_: &mut Shared) -> Outcome {
    let s = presets::identical(2);
    let p = PolicyVector::new(4.317, vec![3.075, 3.075]);
    let t0 = Instant::now();
    let e = estimate_cost_rate(&s, &p, &full_sim(1)).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let rel = (e.cost_rate.mean - IDENTICAL_COST).abs() / IDENTICAL_COST;
    let crit = e.critical_probability.mean;
    let pass = rel <= 0.10 && (0.0..=0.01).contains(&crit) && e.cycles >= 100_000 && secs <= 300.0;
    Outcome::new(
        pass,
        format!(
            "cost {:.4} ± {:.4} (ref {IDENTICAL_COST}, rel diff {:.2}% ≤ 10%), P_crit {:.5} ∈ [0, 0.01], {} cycles in {secs:.1}s",
            e.cost_rate.mean,
            e.cost_rate.std_error,
            100.0 * rel,
            crit,
            e.cycles
        ),
    )
}

fn c2_graded_cost(_: &mut Shared) -> Outcome {
    let s = presets::graded(2);
    let p = PolicyVector::new(5.998, vec![2.679, 2.014]);
    let e = estimate_cost_rate(&s, &p, &full_sim(2)).unwrap();
    let rel = (e.cost_rate.mean - GRADED_COST).abs() / GRADED_COST;
    let crit = e.critical_probability.mean;
    let pass = rel <= 0.10 && (crit - GRADED_CRITICAL).abs() <= 0.01;
    Outcome::new(
        pass,
        format!(
            "cost {:.4} ± {:.4} (ref {GRADED_COST}, rel diff {:.1}% vs 10% allowed), P_crit {:.5} (ref {GRADED_CRITICAL} ± 0.01)",
            e.cost_rate.mean,
            e.cost_rate.std_error,
            100.0 * rel,
            crit
        ),
    )
}

fn c3_optimizer_recovery(sh: &mut Shared) -> Outcome {
    let (pa, ra) = identical_optimum(sh, 2);
    let rel_a = (ra.best_cost.mean - IDENTICAL_COST).abs() / IDENTICAL_COST;
    let (pb, rb) = optimize(&presets::graded(2), &opt_config("genetic", false, 3), None).unwrap();
    let rel_b = (rb.best_cost.mean - GRADED_COST).abs() / GRADED_COST;
    let pass = rel_a <= 0.05 && ra.feasible && rel_b <= 0.07 && rb.feasible;
    Outcome::new(
        pass,
        format!(
            "pattern search m=2 identical: {} cost {:.4} ± {:.4} (rel diff {:.2}% ≤ 5%); GA m=2 graded: {} cost {:.4} ± {:.4} (rel diff {:.1}% vs 7% allowed)",
            fmt_policy(&pa),
            ra.best_cost.mean,
            ra.best_cost.std_error,
            100.0 * rel_a,
            fmt_policy(&pb),
            rb.best_cost.mean,
            rb.best_cost.std_error,
            100.0 * rel_b
        ),
    )
}

/// Costs are compared through the full-effort estimate of each optimum; the
/// optimal `T` through its mean and standard error over independent runs.
fn c4_trend_in_m(sh: &mut Shared) -> Outcome {
    struct Row {
        m: usize,
        cost: f64,
        cost_se: f64,
        t_mean: f64,
        t_se: f64,
        ts: Vec<f64>,
    }
    let rows: Vec<Row> = (2..=5)
        .map(|m| {
            let (_, r) = identical_optimum(sh, m);
            let ts: Vec<f64> = (0..REPLICATES).map(|k| identical_run(sh, m, k).0.inspection_period).collect();
            let n = ts.len() as f64;
            let t_mean = ts.iter().sum::<f64>() / n;
            let var = ts.iter().map(|t| (t - t_mean).powi(2)).sum::<f64>() / (n - 1.0);
            Row { m, cost: r.best_cost.mean, cost_se: r.best_cost.std_error, t_mean, t_se: (var / n).sqrt(), ts }
        })
        .collect();
    let mut pass = true;
    let mut parts: Vec<String> = rows
        .iter()
        .map(|r| {
            let ts: Vec<String> = r.ts.iter().map(|t| format!("{t:.3}")).collect();
            format!("m={}: cost {:.3} ± {:.3}, T {:.3} ± {:.3} [{}]", r.m, r.cost, r.cost_se, r.t_mean, r.t_se, ts.join(" "))
        })
        .collect();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let cost_ok = b.cost >= a.cost - a.cost_se.hypot(b.cost_se);
        let t_ok = b.t_mean <= a.t_mean + a.t_se.hypot(b.t_se);
        if !(cost_ok && t_ok) {
            pass = false;
            parts.push(format!("violation between m={} and m={} (cost ok: {cost_ok}, T ok: {t_ok})", a.m, b.m));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn figure_system() -> (SystemSpec, PolicyVector) {
    let comps: Vec<ComponentSpec> =
        [0.2, 0.3, 0.4, 0.5, 0.6].iter().map(|&a| presets::component(a, 1.0)).collect();
    let s = SystemSpec { components: comps, ..presets::identical(1) };
    let p = PolicyVector::new(100.0, vec![3.0; 5]);
    (s, p)
}

fn c5_critical_curve(_: &mut Shared) -> Outcome {
    let (s, p) = figure_system();
    let taus = [0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
    let cfg = SimConfig { horizon_cycles: 1100, replications: 20, base_seed: 5, ..SimConfig::default() };
    let ms = [2, 3, 4, 5];
    let curves: Vec<Vec<CurvePoint>> = ms
        .iter()
        .map(|&m| {
            let sub = SystemSpec { components: s.components[..m].to_vec(), ..s.clone() };
            let sp = PolicyVector::new(p.inspection_period, p.preventive_thresholds[..m].to_vec());
            critical_probability_curve(&sub, &sp, &taus, &cfg).into_iter().map(|r| r.unwrap()).collect()
        })
        .collect();
    let comb = |a: &CurvePoint, b: &CurvePoint| (a.estimate.std_error.powi(2) + b.estimate.std_error.powi(2)).sqrt();
    let mut bad = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        for w in c.windows(2) {
            if w[1].estimate.mean < w[0].estimate.mean - 3.0 * comb(&w[0], &w[1]) {
                bad.push(format!("m={} decreases between τ={} and τ={}", ms[i], w[0].x, w[1].x));
            }
        }
    }
    for i in 1..curves.len() {
        for j in 0..taus.len() {
            let (a, b) = (&curves[i - 1][j], &curves[i][j]);
            if b.estimate.mean > a.estimate.mean + 3.0 * comb(a, b) {
                bad.push(format!("τ={}: m={} above m={}", taus[j], ms[i], ms[i - 1]));
            }
        }
    }
    let summary: Vec<String> = curves
        .iter()
        .zip(ms)
        .map(|(c, m)| {
            let v: Vec<String> = c.iter().map(|pt| format!("{:.4}", pt.estimate.mean)).collect();
            format!("m={m}: [{}]", v.join(" "))
        })
        .collect();
    Outcome::new(bad.is_empty(), format!("τ = {taus:?}; {}{}", summary.join("; "), if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }))
}

fn c6_reward_curve(_: &mut Shared) -> Outcome {
    let cfg = SimConfig { base_seed: 6, ..SimConfig::default() };
    let alphas = [1.0, 1.1, 1.2, 1.3, 1.4];
    let curves: Vec<Vec<CurvePoint>> = alphas
        .iter()
        .map(|&a| {
            let c = ComponentSpec { reward_decay: 2.0, ..presets::component(a, 1.0) };
            reward_rate_curve(&c, 10.0, 20, 4000, &cfg).unwrap()
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    for i in 1..curves.len() {
        for (a, b) in curves[i - 1].iter().zip(&curves[i]) {
            let se = (a.estimate.std_error.powi(2) + b.estimate.std_error.powi(2)).sqrt();
            let excess = (b.estimate.mean - a.estimate.mean) / se;
            worst = worst.max(excess);
            if excess > 3.0 {
                bad += 1;
            }
        }
    }
    let at_end: Vec<String> = curves.iter().map(|c| format!("{:.4}", c.last().unwrap().estimate.mean)).collect();
    Outcome::new(
        bad == 0,
        format!(
            "α = {alphas:?}, 20 periods up to T=10; rates at T=10: [{}]; largest increase in α is {worst:.2} s.e. (≤ 3 allowed), {bad} violations",
            at_end.join(" ")
        ),
    )
}

fn c7_oracle_equivalence(_: &mut Shared) -> Outcome {
    let cfg = SimConfig { grid_step: 0.005, replications: 20, base_seed: 7, ..SimConfig::default() };
    let s1 = presets::identical(1);
    let p1 = PolicyVector::new(4.317, vec![3.075]);
    let a = cross_check(&s1, &p1, &StartState::renewal(&s1, &p1), 200_000, &cfg).unwrap();
    let s2 = presets::identical(2);
    let p2 = PolicyVector::new(4.317, vec![3.075, 3.075]);
    let st2 = StartState { levels: vec![1.0, 1.0], time_to_inspection: 2.0 };
    let b = cross_check(&s2, &p2, &st2, 200_000, &cfg).unwrap();
    let n = a.len() + b.len();
    let max_z = a.iter().chain(&b).map(|c| c.z.abs()).fold(0.0, f64::max);
    let pass = n >= 12 && max_z <= 3.0;
    if !pass {
        eprintln!("m=1:\n{}\nm=2:\n{}", render(&a), render(&b));
    }
    Outcome::new(pass, format!("{} (m=1) + {} (m=2) = {n} quantities, max |z| = {max_z:.2} (≤ 3 required)", a.len(), b.len()))
}

/// Asymptotic Kolmogorov critical value at level 0.001.
const KS_CRITICAL_0_001: f64 = 1.94947;

fn ks_statistic(p: &GammaParams, duration: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| sample_increment(p, duration, &mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = increment_cdf(p, duration, x).unwrap();
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    d * nf.sqrt()
}

fn c8_property_suites(_: &mut Shared) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    let p = GammaParams { shape_rate: 1.25, rate: 2.0 };
    let ks = ks_statistic(&p, 2.0, 1_000_000, 8);
    let ks_small = ks_statistic(&GammaParams { shape_rate: 0.3, rate: 1.0 }, 0.5, 1_000_000, 9);
    let ks_ok = ks < KS_CRITICAL_0_001 && ks_small < KS_CRITICAL_0_001;
    pass &= ks_ok;
    parts.push(format!("KS √n·D = {ks:.3}, {ks_small:.3} (< {KS_CRITICAL_0_001})"));

    let mut fp_err: f64 = 0.0;
    for i in 1..=1000 {
        let t = 20.0 * i as f64 / 1000.0;
        let a = first_passage_cdf(&p, 6.0, t).unwrap();
        let b = 1.0 - increment_cdf(&p, t, 6.0).unwrap();
        fp_err = fp_err.max((a - b).abs());
    }
    pass &= fp_err <= 1e-10;
    parts.push(format!("first-passage identity max err {fp_err:.1e}"));

    let s = presets::identical(2);
    let pol = PolicyVector::new(4.317, vec![3.075, 3.075]);
    let reps = run_replications(&s, &pol, &full_sim(10), true).unwrap();
    let recs: Vec<_> = reps.iter().flat_map(|r| &r.records).collect();
    let mut broken = 0usize;
    for r in &recs {
        let c = &s.components[0];
        let n_corr = r.actions.iter().filter(|a| **a == Action::Corrective).count() as f64;
        let n_prev = r.actions.iter().filter(|a| **a == Action::Preventive).count() as f64;
        let down: f64 = r.downtime.iter().sum::<f64>() * c.downtime_cost_rate
            + s.nondegrading_downtime_cost_rate * r.nondegrading_downtime;
        let actions_ok = r.actions.iter().zip(&r.levels_at_maintenance).zip(&pol.preventive_thresholds).all(
            |((a, x), m)| match a {
                Action::Corrective => *x >= c.failure_threshold,
                Action::Preventive => *x >= *m && *x < c.failure_threshold,
                Action::None => *x < *m,
            },
        );
        let costs_ok = (r.costs.corrective_degrading - c.corrective_cost * n_corr).abs() < 1e-9
            && (r.costs.preventive - c.preventive_cost * n_prev).abs() < 1e-9
            && r.costs.corrective_nondegrading
                == if r.nondegrading_repaired { s.nondegrading_corrective_cost } else { 0.0 }
            && (r.costs.downtime - down).abs() < 1e-9
            && r.costs.inspections == s.inspection_cost * r.inspections_count as f64
            && r.costs.reward >= 0.0
            && r.critical == (n_corr as usize == s.m());
        if !(actions_ok && costs_ok && r.duration > 0.0) {
            broken += 1;
        }
    }
    pass &= broken == 0 && recs.len() >= 100_000;
    parts.push(format!("{} recorded cycles, {broken} invariant violations", recs.len()));

    let coarse = estimate_cost_rate(&s, &pol, &full_sim(11)).unwrap();
    let fine = estimate_cost_rate(&s, &pol, &SimConfig { grid_step: 0.005, ..full_sim(11) }).unwrap();
    let shift = (fine.cost_rate.mean - coarse.cost_rate.mean).abs() / coarse.cost_rate.mean;
    pass &= shift < 0.02;
    parts.push(format!("halving δ moves cost {:.4} → {:.4} ({:.2}% < 2%)", coarse.cost_rate.mean, fine.cost_rate.mean, 100.0 * shift));

    let small = SimConfig { horizon_cycles: 600, replications: 8, base_seed: 12, ..SimConfig::default() };
    let bits: Vec<(u64, u64)> = [1, 2, 4]
        .iter()
        .map(|&n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            let e = pool.install(|| estimate_cost_rate(&s, &pol, &small).unwrap());
            (e.cost_rate.mean.to_bits(), e.critical_probability.mean.to_bits())
        })
        .collect();
    let same = bits.windows(2).all(|w| w[0] == w[1]);
    pass &= same;
    parts.push(format!("1/2/4 threads bit-identical: {same}"));

    Outcome::new(pass, parts.join("; "))
}

fn baseline(sh: &mut Shared, m: usize) -> Baseline {
    let (policy, r) = identical_optimum(sh, m);
    Baseline { m, policy, cost: r.best_cost, feasible: r.feasible }
}

fn c9_sensitivity(sh: &mut Shared) -> Outcome {
    let template = presets::identical(1);
    let bases = vec![baseline(sh, 2), baseline(sh, 5)];
    let mut opt = opt_config("pattern-search", true, 900);
    opt.budget = 60;
    let plans = [
        (Parameter::Alpha, vec![1.10, 1.25, 1.40]),
        (Parameter::Scale, vec![0.35, 0.50, 0.65]),
        (Parameter::Lambda, vec![0.010, 0.025, 0.040]),
    ];
    let tables: Vec<SensitivityTable> = plans
        .iter()
        .map(|(parameter, grid)| {
            let plan = SensitivityPlan { parameter: *parameter, grid: grid.clone(), m_values: vec![2, 5] };
            run_sensitivity(&template, &plan, &opt, &bases).unwrap()
        })
        .collect();
    for t in &tables {
        println!("V for {}\n{}", t.parameter.label(), t.render());
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for t in &tables {
        for c in &t.cells {
            let at_base = (c.value - t.parameter.value_in(&template)).abs() < 1e-12;
            if at_base && c.v != Some(0.0) {
                pass = false;
                parts.push(format!("baseline cell m={} {} is {:?}", c.m, t.parameter.label(), c.v));
            }
            if c.v.is_some_and(|v| v < 0.0) {
                pass = false;
            }
        }
    }
    for m in [2, 5] {
        let [a, b, l] = [0, 1, 2].map(|i| tables[i].max_v(m).unwrap_or(f64::NAN));
        let ok = l < a && l < b;
        pass &= ok;
        parts.push(format!("m={m}: max V α {a:.4}, β {b:.4}, λ {l:.4} (λ smallest: {ok})"));
    }
    let v = tables[0].cell(2, 1.10).and_then(|c| c.v).unwrap_or(f64::NAN);
    let band = (0.1246 * 0.5..=0.1246 * 1.5).contains(&v);
    pass &= band;
    parts.push(format!("m=2 α=1.10: V = {v:.4} (ref 0.1246 ± 50%: {band})"));
    Outcome::new(pass, parts.join("; "))
}

type Criterion = fn(&mut Shared) -> Outcome;

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, &str, Criterion); 9] = [
        (1, "benchmark cost rate at fixed policy", c1_benchmark_cost),
        (2, "graded components at fixed policy", c2_graded_cost),
        (3, "optimizer recovery", c3_optimizer_recovery),
        (4, "trend of the optimum in m", c4_trend_in_m),
        (5, "critical probability versus delay", c5_critical_curve),
        (6, "reward rate ordered in shape", c6_reward_curve),
        (7, "oracle equivalence", c7_oracle_equivalence),
        (8, "property suites", c8_property_suites),
        (9, "sensitivity ordering", c9_sensitivity),
    ];
    let mut shared = Shared::default();
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t0 = Instant::now();
        let o = f(&mut shared);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} ({name}): {verdict} [{:.0}s] {}", t0.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
