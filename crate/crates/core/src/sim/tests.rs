use proptest::prelude::*;

use super::*;
use crate::model::{presets, PolicyVector, StartState, SystemSpec};
use crate::Error;

fn bench() -> (SystemSpec, PolicyVector) {
    (presets::identical(2), PolicyVector::new(4.317, vec![3.075, 3.075]))
}

fn quick(seed: u64) -> SimConfig {
    SimConfig { grid_step: 0.02, horizon_cycles: 300, replications: 4, base_seed: seed, warmup_cycles: 20 }
}

fn check_record(s: &SystemSpec, p: &PolicyVector, r: &CycleRecord) {
    assert!(r.duration > 0.0);
    let mut down = 0.0;
    for (i, c) in s.components.iter().enumerate() {
        down += c.downtime_cost_rate * r.downtime[i];
        let x = r.levels_at_maintenance[i];
        match r.actions[i] {
            Action::Corrective => assert!(x >= c.failure_threshold),
            Action::Preventive => assert!(x >= p.preventive_thresholds[i] && x < c.failure_threshold),
            Action::None => assert!(x < p.preventive_thresholds[i]),
        }
        assert!(r.downtime[i] >= 0.0 && r.downtime[i] <= r.duration);
        assert!(r.downtime[i] <= s.delay + 1e-12 || r.trigger == Trigger::InspectionAfterLateFailure);
    }
    down += s.nondegrading_downtime_cost_rate * r.nondegrading_downtime;
    assert_eq!(r.costs.downtime, down);
    assert_eq!(r.costs.inspections, s.inspection_cost * r.inspections_count as f64);
    assert!(r.nondegrading_downtime >= 0.0 && r.nondegrading_downtime <= r.duration);
    assert_eq!(r.critical, r.actions.iter().all(|a| *a == Action::Corrective));
    let all_replaced = r.actions.iter().all(|a| *a != Action::None);
    let at_inspection = r.post_state.time_to_inspection == p.inspection_period;
    if all_replaced && at_inspection {
        assert!(r.post_state.levels.iter().all(|&x| x == 0.0));
    }
    assert!(r.post_state.time_to_inspection > 0.0 && r.post_state.time_to_inspection <= p.inspection_period);
    for v in [r.costs.preventive, r.costs.corrective_degrading, r.costs.corrective_nondegrading, r.costs.reward] {
        assert!(v >= 0.0);
    }
}

#[test]
fn config_validation() {
    let (s, _) = bench();
    let mut cfg = quick(0);
    cfg.grid_step = 0.2;
    assert!(matches!(cfg.validate_for(&s), Err(Error::Config(_))));
    let mut cfg = quick(0);
    cfg.warmup_cycles = cfg.horizon_cycles;
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    assert!(quick(0).validate_for(&s).is_ok());
}

#[test]
fn records_satisfy_invariants() {
    let (s, p) = bench();
    let reps = run_replications(&s, &p, &quick(3), true).unwrap();
    let mut triggers = std::collections::HashSet::new();
    for r in reps.iter().flat_map(|r| &r.records) {
        check_record(&s, &p, r);
        triggers.insert(format!("{:?}", r.trigger));
    }
    assert_eq!(triggers.len(), 4, "{triggers:?}");
}

#[test]
fn zero_cost_structure_gives_zero_rate() {
    let (mut s, p) = bench();
    for c in &mut s.components {
        c.corrective_cost = 0.0;
        c.preventive_cost = 0.0;
        c.downtime_cost_rate = 0.0;
        c.reward_floor = 0.0;
        c.reward_amplitude = 0.0;
    }
    s.nondegrading_corrective_cost = 0.0;
    s.nondegrading_downtime_cost_rate = 0.0;
    s.inspection_cost = 0.0;
    let e = estimate_cost_rate(&s, &p, &quick(1)).unwrap();
    assert_eq!(e.cost_rate.mean, 0.0);
    assert_eq!(e.breakdown_rates, CostBreakdown::default());
}

#[test]
fn collapsed_thresholds_never_act_preventively() {
    let (mut s, _) = bench();
    s.nondegrading_rate = 0.0;
    let p = PolicyVector::new(4.317, vec![6.0, 6.0]);
    let reps = run_replications(&s, &p, &quick(2), true).unwrap();
    for r in reps.iter().flat_map(|r| &r.records) {
        assert!(r.actions.iter().all(|a| *a != Action::Preventive));
        assert!(!r.nondegrading_repaired);
        assert_ne!(r.trigger, Trigger::InspectionOnly);
    }
}

#[test]
fn zero_delay_maintains_at_failure() {
    let (mut s, p) = bench();
    s.delay = 0.0;
    let reps = run_replications(&s, &p, &quick(5), true).unwrap();
    let mut saw_nd = false;
    for r in reps.iter().flat_map(|r| &r.records) {
        check_record(&s, &p, r);
        match r.trigger {
            Trigger::DegradingFailureDelay => {
                assert!(r.downtime.contains(&0.0));
            }
            Trigger::NondegradingFailureDelay => {
                saw_nd = true;
                assert_eq!(r.nondegrading_downtime, 0.0);
                assert!(r.downtime.iter().all(|&d| d == 0.0));
            }
            _ => {}
        }
    }
    assert!(saw_nd);
}

#[test]
fn bit_identical_across_thread_counts() {
    let (s, p) = bench();
    let cfg = quick(11);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_cost_rate(&s, &p, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.cost_rate.mean.to_bits(), b.cost_rate.mean.to_bits());
    assert_eq!(a.cost_rate.std_error.to_bits(), b.cost_rate.std_error.to_bits());
    assert_eq!(a.critical_probability.mean.to_bits(), b.critical_probability.mean.to_bits());
    let c = estimate_cost_rate(&s, &p, &SimConfig { base_seed: 12, ..cfg }).unwrap();
    assert_ne!(a.cost_rate.mean, c.cost_rate.mean);
}

#[test]
fn fixed_start_cycles_start_where_told() {
    let (s, p) = bench();
    let st = StartState { levels: vec![2.5, 0.3], time_to_inspection: 0.7 };
    let recs = cycles_from_state(&s, &p, &st, 400, &quick(9)).unwrap();
    assert_eq!(recs.len(), 400);
    // A component started above its preventive band edge ends the cycle no later than T_1 unless it fails first.
    let st2 = StartState { levels: vec![3.2, 0.0], time_to_inspection: 0.7 };
    for r in cycles_from_state(&s, &p, &st2, 200, &quick(9)).unwrap() {
        assert!(r.duration <= 0.7 + 1e-12);
        assert_eq!(r.inspections_count, 0);
    }
    let bad = StartState { levels: vec![6.5, 0.0], time_to_inspection: 0.7 };
    assert!(cycles_from_state(&s, &p, &bad, 10, &quick(9)).is_err());
}

#[test]
fn stationary_sample_lies_in_chain_support() {
    let (s, p) = bench();
    let sample = stationary_sample(&s, &p, &quick(4)).unwrap();
    assert_eq!(sample.len(), quick(4).post_warmup_cycles());
    for st in &sample {
        assert!(st.levels.iter().zip(&p.preventive_thresholds).all(|(x, m)| *x < *m));
    }
}

#[test]
fn reward_curve_limits_and_exact_mean() {
    let c = crate::model::ComponentSpec { reward_decay: 2.0, ..presets::component(1.2, 1.0) };
    let cfg = SimConfig { grid_step: 0.01, replications: 4, ..Default::default() };
    let curve = reward_rate_curve(&c, 4.0, 8, 4000, &cfg).unwrap();
    // E[e^{-γ X(t)}] = (β / (β + γ))^{α t}, so the rate is θ₀ + g (1 − q^{αT}) / (α T ln(1/q)).
    let q: f64 = 1.0 / 3.0;
    for pt in &curve {
        let k = 1.2 * pt.x * (1.0 / q).ln();
        let exact = 2.0 + 2.0 * (1.0 - (-k).exp()) / k;
        assert!((pt.estimate.mean - exact).abs() < 4.0 * pt.estimate.std_error + 2e-3, "{} {}", pt.estimate.mean, exact);
    }
    let flat = crate::model::ComponentSpec { reward_decay: 0.0, ..c };
    for pt in reward_rate_curve(&flat, 2.0, 4, 100, &cfg).unwrap() {
        assert!((pt.estimate.mean - 4.0).abs() < 1e-12);
    }
}

#[test]
fn critical_curve_flags_infeasible_delays() {
    let (s, p) = bench();
    let pts = critical_probability_curve(&s, &p, &[0.5, 2.5], &quick(1));
    assert!(pts[0].is_ok());
    assert!(pts[1].is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_systems_keep_invariants(
        a1 in 0.3f64..2.0, a2 in 0.3f64..2.0, rate in 0.5f64..3.0, lambda in 0.0f64..0.3,
        tau in prop_oneof![Just(0.0), 0.1f64..1.0], mfrac in 0.1f64..1.0, tp in 1.0f64..6.0, seed in 0u64..1000,
    ) {
        let mut s = presets::identical(2);
        s.components[0].gamma = crate::GammaParams { shape_rate: a1, rate };
        s.components[1].gamma = crate::GammaParams { shape_rate: a2, rate };
        s.nondegrading_rate = lambda;
        s.delay = tau;
        let t = tp.max(2.0 * tau + 0.1);
        let p = PolicyVector::new(t, vec![6.0 * mfrac, 6.0 * mfrac.sqrt()]);
        let step = if tau > 0.0 { (tau / 5.0).min(0.05) } else { 0.05 };
        let cfg = SimConfig { grid_step: step, horizon_cycles: 60, replications: 2, base_seed: seed, warmup_cycles: 0 };
        for r in run_replications(&s, &p, &cfg, true).unwrap().iter().flat_map(|r| &r.records) {
            check_record(&s, &p, r);
        }
    }
}
