use rayon::prelude::*;
use serde::Serialize;

use super::{CostBreakdown, CycleEngine, CycleRecord, SimConfig};
use crate::error::Result;
use crate::model::{lemma1_mu, PolicyVector, StartState, SystemSpec};
use crate::stats::EstimateWithError;

/// Post-warmup totals of one replication of the maintenance chain.
#[derive(Debug, Clone)]
pub struct Replication {
    pub cycles: usize,
    pub duration: f64,
    pub costs: CostBreakdown,
    pub critical: usize,
    /// Post-warmup cycle records, kept only on request.
    pub records: Vec<CycleRecord>,
}

/// Long-run cost rate with its decomposition and the critical-situation probability.
#[derive(Debug, Clone, Serialize)]
pub struct CostRateEstimate {
    /// `(Σ costs − Σ reward) / Σ durations`.
    pub cost_rate: EstimateWithError,
    /// Each cost term and the reward divided by the total simulated time.
    pub breakdown_rates: CostBreakdown,
    pub critical_probability: EstimateWithError,
    pub mean_cycle_length: EstimateWithError,
    pub cycles: usize,
    pub mu: f64,
    pub warnings: Vec<String>,
}

/// Runs `cfg.replications` independent chains from the renewal state.
///
/// Results come back in replication order whatever the size of the rayon pool,
/// and each replication owns the stream `cfg.rng(index)`, so aggregates are
/// bit-identical for any degree of parallelism.
pub fn run_replications(s: &SystemSpec, p: &PolicyVector, cfg: &SimConfig, keep_records: bool) -> Result<Vec<Replication>> {
    let engine = CycleEngine::new(s, p, cfg)?;
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = cfg.rng(r as u64);
            let mut state = StartState::renewal(s, p);
            let mut rep = Replication {
                cycles: 0,
                duration: 0.0,
                costs: CostBreakdown::default(),
                critical: 0,
                records: Vec::new(),
            };
            for n in 0..cfg.horizon_cycles {
                let rec = engine.run(&state, &mut rng)?;
                state = rec.post_state.clone();
                if n < cfg.warmup_cycles {
                    continue;
                }
                rep.cycles += 1;
                rep.duration += rec.duration;
                rep.costs.add(&rec.costs);
                rep.critical += rec.critical as usize;
                if keep_records {
                    rep.records.push(rec);
                }
            }
            Ok(rep)
        })
        .collect()
}

/// Estimates the long-run cost rate and the critical-situation probability.
pub fn estimate_cost_rate(s: &SystemSpec, p: &PolicyVector, cfg: &SimConfig) -> Result<CostRateEstimate> {
    let mut warnings = s.validate()?;
    warnings.extend(p.validate(s)?);
    let mu = lemma1_mu(s, p);
    if mu >= 1.0 {
        warnings.push(format!("stability bound mu = {mu} is not below 1; the stationary regime is not guaranteed"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let reps = run_replications(s, p, cfg, false)?;
    Ok(summarize(&reps, mu, warnings))
}

fn summarize(reps: &[Replication], mu: f64, warnings: Vec<String>) -> CostRateEstimate {
    let nets: Vec<f64> = reps.iter().map(|r| r.costs.net()).collect();
    let durations: Vec<f64> = reps.iter().map(|r| r.duration).collect();
    let criticals: Vec<f64> = reps.iter().map(|r| r.critical as f64).collect();
    let counts: Vec<f64> = reps.iter().map(|r| r.cycles as f64).collect();
    let mut totals = CostBreakdown::default();
    reps.iter().for_each(|r| totals.add(&r.costs));
    let time: f64 = durations.iter().sum();
    CostRateEstimate {
        cost_rate: EstimateWithError::ratio(&nets, &durations),
        breakdown_rates: totals.scaled(1.0 / time),
        critical_probability: EstimateWithError::ratio(&criticals, &counts),
        mean_cycle_length: EstimateWithError::ratio(&durations, &counts),
        cycles: reps.iter().map(|r| r.cycles).sum(),
        mu,
        warnings,
    }
}

/// Post-maintenance states visited after warmup: an empirical sample of the
/// stationary law of the embedded chain.
pub fn stationary_sample(s: &SystemSpec, p: &PolicyVector, cfg: &SimConfig) -> Result<Vec<StartState>> {
    let reps = run_replications(s, p, cfg, true)?;
    Ok(reps.into_iter().flat_map(|r| r.records.into_iter().map(|c| c.post_state)).collect())
}

/// Simulates `n` independent cycles from a fixed start state, spread over
/// `cfg.replications` random streams.
pub fn cycles_from_state(
    s: &SystemSpec,
    p: &PolicyVector,
    start: &StartState,
    n: usize,
    cfg: &SimConfig,
) -> Result<Vec<CycleRecord>> {
    start.validate(s, p)?;
    let engine = CycleEngine::new(s, p, cfg)?;
    let reps = cfg.replications.max(1);
    let chunks: Vec<Vec<CycleRecord>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let count = n / reps + usize::from(r < n % reps);
            let mut rng = cfg.rng(r as u64);
            (0..count).map(|_| engine.run(start, &mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
