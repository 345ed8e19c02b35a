use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use super::{Action, CostBreakdown, CycleRecord, SimConfig, Trigger};
use crate::error::{Error, Result};
use crate::model::{reward_rate_at, PolicyVector, StartState, SystemSpec};

const MAX_BLOCK: usize = 32;

struct ComponentWalk {
    cell: Gamma<f64>,
    block: Gamma<f64>,
    flat_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    Degrading,
    Nondegrading,
}

/// Precomputed samplers for one (system, policy, grid) combination.
pub struct CycleEngine<'a> {
    s: &'a SystemSpec,
    p: &'a PolicyVector,
    delta: f64,
    block_cells: usize,
    comps: Vec<ComponentWalk>,
    y_dist: Option<Exp<f64>>,
}

/// Mutable path state inside one cycle.
struct Walk {
    t: f64,
    levels: Vec<f64>,
    failed_at: Vec<Option<f64>>,
    reward: Vec<f64>,
    y: f64,
    y_seen: bool,
    first_failure: Option<(f64, Source)>,
}

/// Per-block buffers reused across blocks.
struct Scratch {
    incs: Vec<f64>,
    refine: Vec<bool>,
    starts: Vec<f64>,
    before: Vec<f64>,
    cells: Vec<[f64; MAX_BLOCK]>,
}

fn check(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::SimulationFault(format!("non-finite {what}: {x}")))
    }
}

impl<'a> CycleEngine<'a> {
    pub fn new(s: &'a SystemSpec, p: &'a PolicyVector, cfg: &SimConfig) -> Result<Self> {
        s.validate()?;
        p.validate(s)?;
        cfg.validate_for(s)?;
        let delta = cfg.grid_step;
        let block_cells = if s.delay > 0.0 { ((s.delay / delta).floor() as usize).clamp(1, MAX_BLOCK) } else { 1 };
        let comps = s
            .components
            .iter()
            .map(|c| {
                Ok(ComponentWalk {
                    cell: c.gamma.increment_distribution(delta)?,
                    block: c.gamma.increment_distribution(delta * block_cells as f64)?,
                    flat_level: c.flat_reward_level(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let y_dist = if s.nondegrading_rate > 0.0 {
            Some(Exp::new(s.nondegrading_rate).map_err(|e| Error::InvalidModel(e.to_string()))?)
        } else {
            None
        };
        Ok(CycleEngine { s, p, delta, block_cells, comps, y_dist })
    }

    /// Simulates one cycle from `start`.
    pub fn run<R: Rng + ?Sized>(&self, start: &StartState, rng: &mut R) -> Result<CycleRecord> {
        let s = self.s;
        let m = s.m();
        let period = self.p.inspection_period;
        let tau = s.delay;
        let mut walk = Walk {
            t: 0.0,
            levels: start.levels.clone(),
            failed_at: vec![None; m],
            reward: vec![0.0; m],
            y: match &self.y_dist {
                Some(d) => d.sample(rng),
                None => f64::INFINITY,
            },
            y_seen: false,
            first_failure: None,
        };
        let mut scratch = Scratch {
            incs: vec![0.0; m],
            refine: vec![false; m],
            starts: vec![0.0; m],
            before: vec![0.0; m],
            cells: vec![[0.0; MAX_BLOCK]; m],
        };
        let mut inspections = 0u32;
        let mut walk_start = 0.0;
        let mut seg_end = start.time_to_inspection;
        let mut stop = seg_end;
        loop {
            let mut idx = 0usize;
            while walk.t < stop {
                let done = self.advance_block(&mut walk, &mut scratch, walk_start, &mut idx, &mut stop, seg_end, rng)?;
                if done {
                    break;
                }
            }
            if walk.first_failure.is_some() {
                break;
            }
            let due = walk
                .levels
                .iter()
                .zip(&self.p.preventive_thresholds)
                .any(|(&x, &mi)| x >= mi);
            if due {
                break;
            }
            inspections += 1;
            walk_start = seg_end;
            seg_end += period;
            stop = seg_end;
        }

        let o = walk.t;
        let at_inspection = o == seg_end;
        let trigger = match walk.first_failure {
            None => Trigger::InspectionOnly,
            Some((z, _)) if at_inspection && z + tau >= seg_end => Trigger::InspectionAfterLateFailure,
            Some((_, Source::Degrading)) => Trigger::DegradingFailureDelay,
            Some((_, Source::Nondegrading)) => Trigger::NondegradingFailureDelay,
        };

        let mut costs = CostBreakdown::default();
        let mut actions = Vec::with_capacity(m);
        let mut downtime = Vec::with_capacity(m);
        let mut post_levels = Vec::with_capacity(m);
        for (i, c) in s.components.iter().enumerate() {
            let x = walk.levels[i];
            let action = if walk.failed_at[i].is_some() {
                Action::Corrective
            } else if x >= self.p.preventive_thresholds[i] {
                Action::Preventive
            } else {
                Action::None
            };
            let d = walk.failed_at[i].map_or(0.0, |f| o - f);
            match action {
                Action::Corrective => costs.corrective_degrading += c.corrective_cost,
                Action::Preventive => costs.preventive += c.preventive_cost,
                Action::None => {}
            }
            costs.downtime += c.downtime_cost_rate * d;
            actions.push(action);
            downtime.push(d);
            post_levels.push(if action == Action::None { x } else { 0.0 });
        }
        let nd_down = if walk.y_seen { o - walk.y } else { 0.0 };
        if walk.y_seen {
            costs.corrective_nondegrading = s.nondegrading_corrective_cost;
        }
        costs.downtime += s.nondegrading_downtime_cost_rate * nd_down;
        costs.inspections = s.inspection_cost * inspections as f64;
        let reward_integral: f64 = walk.reward.iter().sum();
        costs.reward = reward_integral;
        let critical = actions.iter().all(|a| *a == Action::Corrective);

        Ok(CycleRecord {
            duration: o,
            trigger,
            actions,
            nondegrading_repaired: walk.y_seen,
            inspections_count: inspections,
            downtime,
            nondegrading_downtime: nd_down,
            reward_integral,
            costs,
            critical,
            levels_at_maintenance: walk.levels,
            post_state: StartState {
                levels: post_levels,
                time_to_inspection: if at_inspection { period } else { seg_end - o },
            },
        })
    }

    /// Advances the path by one block of at most `block_cells` cells toward `stop`.
    /// Returns `true` when the cycle ends inside the block (zero delay, non-degrading trigger).
    #[allow(clippy::too_many_arguments)]
    fn advance_block<R: Rng + ?Sized>(
        &self,
        walk: &mut Walk,
        scratch: &mut Scratch,
        walk_start: f64,
        idx: &mut usize,
        stop: &mut f64,
        seg_end: f64,
        rng: &mut R,
    ) -> Result<bool> {
        let delta = self.delta;
        let s = self.s;
        let tau = s.delay;

        // Cell end times of this block; the last one is clipped to `stop`.
        let mut ends = [0.0f64; MAX_BLOCK];
        let mut n = 0;
        let mut partial = false;
        while n < self.block_cells {
            let mut e = walk_start + (*idx + n + 1) as f64 * delta;
            if e >= *stop - 1e-9 * delta {
                partial = e != *stop;
                e = *stop;
                ends[n] = e;
                n += 1;
                break;
            }
            ends[n] = e;
            n += 1;
        }
        let block_end = ends[n - 1];
        let block_len = block_end - walk.t;
        let full_block = n == self.block_cells && !partial;
        let last_len = if partial { block_end - (walk_start + (*idx + n - 1) as f64 * delta) } else { delta };
        let y_in = !walk.y_seen && walk.y <= block_end;

        let Scratch { incs, refine, starts, before, cells } = scratch;
        refine.iter_mut().for_each(|r| *r = false);
        let mut any_refine = false;
        for (i, c) in s.components.iter().enumerate() {
            if walk.failed_at[i].is_some() {
                continue;
            }
            let inc = if full_block {
                self.comps[i].block.sample(rng)
            } else {
                c.gamma.increment_distribution(block_len)?.sample(rng)
            };
            incs[i] = check(inc, "degradation increment")?;
            refine[i] =
                y_in || walk.levels[i] < self.comps[i].flat_level || walk.levels[i] + inc >= c.failure_threshold;
            any_refine |= refine[i];
        }

        // Components whose path inside the block does not matter move in one step.
        for (i, c) in s.components.iter().enumerate() {
            if walk.failed_at[i].is_some() || refine[i] {
                continue;
            }
            let x0 = walk.levels[i];
            let x1 = x0 + incs[i];
            walk.reward[i] += 0.5 * block_len * (reward_rate_at(c, x0) + reward_rate_at(c, x1));
            walk.levels[i] = x1;
        }
        if !any_refine {
            walk.t = block_end;
            *idx += n;
            return Ok(false);
        }

        // Cell-level increments for the refined components.
        for (i, c) in s.components.iter().enumerate() {
            if !refine[i] {
                continue;
            }
            let out = &mut cells[i][..n];
            if n == 1 {
                out[0] = incs[i];
                continue;
            }
            let mut sum = 0.0;
            for (j, o) in out.iter_mut().enumerate() {
                *o = if j == n - 1 && partial {
                    c.gamma.increment_distribution(last_len)?.sample(rng)
                } else {
                    self.comps[i].cell.sample(rng)
                };
                sum += *o;
            }
            if sum > 0.0 && sum.is_finite() {
                let k = incs[i] / sum;
                out.iter_mut().for_each(|o| *o *= k);
            } else {
                out.iter_mut().for_each(|o| *o = 0.0);
                let j = rng.random_range(0..n);
                out[j] = incs[i];
            }
        }

        starts.copy_from_slice(&walk.levels);
        let mut t0 = walk.t;
        for j in 0..n {
            let t1 = ends[j];
            let mut crossed = false;
            for (i, c) in s.components.iter().enumerate() {
                if !refine[i] || walk.failed_at[i].is_some() {
                    continue;
                }
                let x0 = walk.levels[i];
                let x1 = if j == n - 1 { starts[i] + incs[i] } else { x0 + cells[i][j] };
                before[i] = x0;
                walk.reward[i] += 0.5 * (t1 - t0) * (reward_rate_at(c, x0) + reward_rate_at(c, x1));
                walk.levels[i] = x1;
                if x1 >= c.failure_threshold {
                    walk.failed_at[i] = Some(t1);
                    crossed = true;
                }
            }
            let y_here = !walk.y_seen && walk.y > t0 && walk.y <= t1;
            if y_here {
                walk.y_seen = true;
            }
            if walk.first_failure.is_none() {
                if crossed {
                    walk.first_failure = Some((t1, Source::Degrading));
                    *stop = (t1 + tau).min(seg_end);
                } else if y_here {
                    let y = walk.y;
                    walk.first_failure = Some((y, Source::Nondegrading));
                    if tau == 0.0 {
                        // Maintenance at the failure instant: bridge each path back from t1 to y.
                        self.bridge(walk, before, refine, t0, t1, y, rng)?;
                        walk.t = y;
                        *stop = y;
                        return Ok(true);
                    }
                    *stop = (y + tau).min(seg_end);
                }
            }
            t0 = t1;
        }
        walk.t = block_end;
        *idx += n;
        Ok(false)
    }

    /// Replaces the levels at `t1` by levels at `y ∈ (t0, t1]` drawn from the gamma bridge,
    /// and trims the last reward trapezoid to `(t0, y)`.
    #[allow(clippy::too_many_arguments)]
    fn bridge<R: Rng + ?Sized>(
        &self,
        walk: &mut Walk,
        before: &[f64],
        refine: &[bool],
        t0: f64,
        t1: f64,
        y: f64,
        rng: &mut R,
    ) -> Result<()> {
        for (i, c) in self.s.components.iter().enumerate() {
            if !refine[i] || y >= t1 {
                continue;
            }
            let x0 = before[i];
            let x1 = walk.levels[i];
            let a = c.gamma.increment_distribution(y - t0)?.sample(rng);
            let b = c.gamma.increment_distribution(t1 - y)?.sample(rng);
            let frac = if a + b > 0.0 { a / (a + b) } else { (y - t0) / (t1 - t0) };
            let xy = x0 + (x1 - x0) * check(frac, "bridge fraction")?;
            walk.reward[i] -= 0.5 * (t1 - t0) * (reward_rate_at(c, x0) + reward_rate_at(c, x1));
            walk.reward[i] += 0.5 * (y - t0) * (reward_rate_at(c, x0) + reward_rate_at(c, xy));
            walk.levels[i] = xy;
        }
        Ok(())
    }
}

/// Simulates one cycle from `start` (convenience wrapper around [`CycleEngine`]).
pub fn run_cycle<R: Rng + ?Sized>(
    s: &SystemSpec,
    p: &PolicyVector,
    start: &StartState,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<CycleRecord> {
    start.validate(s, p)?;
    CycleEngine::new(s, p, cfg)?.run(start, rng)
}
