//! Side-by-side comparison of quadrature values and simulated frequencies for
//! one cycle started from a fixed state.

use serde::Serialize;

use crate::error::Result;
use crate::model::{PolicyVector, StartState, SystemSpec};
use crate::oracle::Oracle;
use crate::sim::{cycles_from_state, Action, CycleRecord, SimConfig};
use crate::stats::EstimateWithError;

/// Intervals whose end probability is below this are not compared individually.
pub const MIN_INTERVAL_MASS: f64 = 0.01;
pub const MAX_COMPARED_INTERVALS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub oracle: f64,
    pub estimate: EstimateWithError,
    pub z: f64,
}

/// Simulates `cycles` cycles from `st` and compares, per component, the
/// probabilities of corrective and preventive replacement and the mean
/// downtime; the non-degrading repair probability and downtime; the mean cycle
/// length; and, for each inspection interval carrying enough mass, the
/// probability that the cycle ends there together with the per-component
/// action probabilities within it. Fails for more than two components.
pub fn cross_check(
    s: &SystemSpec,
    p: &PolicyVector,
    st: &StartState,
    cycles: usize,
    cfg: &SimConfig,
) -> Result<Vec<Comparison>> {
    let oracle = Oracle::new(s, p, st)?;
    let totals = oracle.totals()?;
    let recs = cycles_from_state(s, p, st, cycles, cfg)?;
    let mut out = Vec::new();
    let mut push = |quantity: String, exact: f64, estimate: EstimateWithError| {
        let z = estimate.z_against(&EstimateWithError::exact(exact));
        out.push(Comparison { quantity, oracle: exact, estimate, z });
    };
    let share = |f: &dyn Fn(&CycleRecord) -> bool| {
        EstimateWithError::proportion(recs.iter().filter(|r| f(r)).count(), recs.len())
    };
    let mean = |f: &dyn Fn(&CycleRecord) -> f64| {
        EstimateWithError::from_samples(&recs.iter().map(f).collect::<Vec<_>>())
    };

    for i in 0..s.m() {
        push(format!("P(corrective {i})"), totals.corrective[i], share(&|r| r.actions[i] == Action::Corrective));
        push(format!("P(preventive {i})"), totals.preventive[i], share(&|r| r.actions[i] == Action::Preventive));
        push(format!("E[downtime {i}]"), totals.downtime[i], mean(&|r| r.downtime[i]));
    }
    push("P(non-degrading repair)".into(), totals.nondegrading, share(&|r| r.nondegrading_repaired));
    push("E[non-degrading downtime]".into(), totals.nondegrading_downtime, mean(&|r| r.nondegrading_downtime));
    push("E[cycle length]".into(), totals.expected_length, mean(&|r| r.duration));

    for iv in totals.intervals.iter().filter(|iv| iv.end_probability >= MIN_INTERVAL_MASS).take(MAX_COMPARED_INTERVALS) {
        let k = iv.k as u32;
        push(format!("P(end in interval {k})"), iv.end_probability, share(&|r| r.interval_index() == k));
        for i in 0..s.m() {
            push(
                format!("P(corrective {i}, interval {k})"),
                iv.corrective[i],
                share(&|r| r.interval_index() == k && r.actions[i] == Action::Corrective),
            );
            push(
                format!("P(preventive {i}, interval {k})"),
                iv.preventive[i],
                share(&|r| r.interval_index() == k && r.actions[i] == Action::Preventive),
            );
        }
    }
    Ok(out)
}

/// Plain-text table of comparisons.
pub fn render(rows: &[Comparison]) -> String {
    let mut out = format!("{:<32} {:>12} {:>12} {:>10} {:>7}\n", "quantity", "oracle", "simulated", "s.e.", "z");
    for r in rows {
        out += &format!(
            "{:<32} {:>12.6} {:>12.6} {:>10.2e} {:>7.2}\n",
            r.quantity, r.oracle, r.estimate.mean, r.estimate.std_error, r.z
        );
    }
    out
}
