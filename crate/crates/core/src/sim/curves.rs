use rayon::prelude::*;
use rand_distr::Distribution;
use serde::Serialize;

use super::{run_replications, SimConfig};
use crate::error::{Error, Result};
use crate::model::{ComponentSpec, PolicyVector, SystemSpec};
use crate::stats::EstimateWithError;

/// One point of a sampled curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: EstimateWithError,
}

/// Critical-situation probability for each delay in `taus`, all other inputs fixed.
///
/// The grid step is tightened to `τ / 5` where needed. Entries with `T ≤ 2τ`
/// are returned as errors without affecting the others.
pub fn critical_probability_curve(
    s: &SystemSpec,
    p: &PolicyVector,
    taus: &[f64],
    cfg: &SimConfig,
) -> Vec<Result<CurvePoint>> {
    taus.iter()
        .map(|&tau| {
            let sys = SystemSpec { delay: tau, ..s.clone() };
            if !(p.inspection_period > 2.0 * tau) {
                return Err(Error::InvalidModel(format!(
                    "delay {tau} is infeasible for inspection period {}",
                    p.inspection_period
                )));
            }
            let mut c = cfg.clone();
            if tau > 0.0 {
                c.grid_step = c.grid_step.min(tau / 5.0);
            }
            let reps = run_replications(&sys, p, &c, false)?;
            let crit: Vec<f64> = reps.iter().map(|r| r.critical as f64).collect();
            let n: Vec<f64> = reps.iter().map(|r| r.cycles as f64).collect();
            Ok(CurvePoint { x: tau, estimate: EstimateWithError::ratio(&crit, &n) })
        })
        .collect()
}

/// Expected reward rate `(1/T) ∫₀ᵀ E[θ₀ + g e^{−γ X(t)}] dt` for `T` on the grid
/// `horizon · j / points`, `j = 1..=points`, estimated from `paths` simulated
/// paths integrated by the trapezoid rule. Failure is ignored here.
pub fn reward_rate_curve(
    c: &ComponentSpec,
    horizon: f64,
    points: usize,
    paths: usize,
    cfg: &SimConfig,
) -> Result<Vec<CurvePoint>> {
    c.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    if points == 0 || paths < 2 {
        return Err(Error::Config("need at least one grid point and two paths".into()));
    }
    if !(cfg.grid_step > 0.0) {
        return Err(Error::Config(format!("grid step must be positive, got {}", cfg.grid_step)));
    }
    let delta = cfg.grid_step;
    let knots: Vec<f64> = (1..=points).map(|j| horizon * j as f64 / points as f64).collect();
    let cell = c.gamma.increment_distribution(delta)?;
    let reps = cfg.replications.max(1);

    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let count = paths / reps + usize::from(r < paths % reps);
            let mut rng = cfg.rng(r as u64);
            let mut sum = vec![0.0; points];
            let mut sumsq = vec![0.0; points];
            for _ in 0..count {
                let mut level = 0.0;
                let mut t = 0.0;
                let mut integral = 0.0;
                for (j, &knot) in knots.iter().enumerate() {
                    // Cells anchored at the previous knot, last one clipped.
                    let anchor = t;
                    let mut idx = 1usize;
                    while t < knot {
                        let mut e = anchor + idx as f64 * delta;
                        let step = if e >= knot - 1e-9 * delta {
                            e = knot;
                            c.gamma.increment_distribution(e - t)?.sample(&mut rng)
                        } else {
                            cell.sample(&mut rng)
                        };
                        let next = level + step;
                        integral += 0.5 * (e - t) * (c.reward_curve(level) + c.reward_curve(next));
                        level = next;
                        t = e;
                        idx += 1;
                    }
                    let rate = integral / knot;
                    sum[j] += rate;
                    sumsq[j] += rate * rate;
                }
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<_>>()?;

    let n = paths as f64;
    Ok(knots
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let s: f64 = partials.iter().map(|p| p.0[j]).sum();
            let ss: f64 = partials.iter().map(|p| p.1[j]).sum();
            let mean = s / n;
            let var = ((ss - n * mean * mean) / (n - 1.0)).max(0.0);
            CurvePoint { x, estimate: EstimateWithError { mean, std_error: (var / n).sqrt(), n: paths } }
        })
        .collect())
}
