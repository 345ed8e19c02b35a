use serde::{Deserialize, Serialize};

use super::{Candidate, Effort, Evaluator, OptConfig, SearchStrategy};
use crate::error::{Error, Result};

/// Mesh sizes are fractions of each coordinate's bound width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternParams {
    pub initial_mesh: f64,
    pub contraction: f64,
    pub expansion: f64,
    pub min_mesh: f64,
}

impl Default for PatternParams {
    fn default() -> Self {
        PatternParams { initial_mesh: 0.25, contraction: 0.5, expansion: 2.0, min_mesh: 0.002 }
    }
}

impl PatternParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_mesh > 0.0
            && self.min_mesh > 0.0
            && self.min_mesh <= self.initial_mesh
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.expansion >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid pattern-search parameters {self:?}")))
        }
    }
}

/// Compass search: polls `x ± mesh·w_i·e_i` for every coordinate (in parallel),
/// `w_i` being the width of the box along `i`. Moves to the best poll point if it dominates the incumbent and expands the
/// mesh (never beyond its initial size), otherwise contracts. Stops when the
/// mesh falls below the minimum or the budget is spent.
pub struct PatternSearch;

impl SearchStrategy for PatternSearch {
    fn name(&self) -> &'static str {
        "pattern-search"
    }

    fn search(&self, ev: &Evaluator<'_>, start: &Candidate, cfg: &OptConfig, budget: usize) -> Result<Vec<f64>> {
        let n = ev.bounds.dim();
        if budget < 2 * n {
            return Err(Error::Config(format!(
                "pattern search needs {} evaluations for its first poll, budget leaves {budget}",
                2 * n
            )));
        }
        let pp = &cfg.pattern;
        let mut used = 0;
        let mut best = start.clone();
        let mut mesh = pp.initial_mesh;
        while mesh >= pp.min_mesh && used < budget {
            let mut polls = Vec::with_capacity(2 * n);
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut y = best.x.clone();
                    y[i] += sign * mesh * ev.bounds.width(i);
                    let y = ev.bounds.clip(&y);
                    if y != best.x && !polls.contains(&y) {
                        polls.push(y);
                    }
                }
            }
            polls.truncate(budget - used);
            used += polls.len();
            let cands = ev.evaluate_all(&polls, Effort::Search)?;
            match ev.best(&cands) {
                Some(c) if c.better_than(&best, ev.limit) => {
                    best = c.clone();
                    mesh = (mesh * pp.expansion).min(pp.initial_mesh);
                }
                _ => mesh *= pp.contraction,
            }
        }
        Ok(best.x)
    }
}
