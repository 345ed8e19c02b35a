use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Candidate, Effort, Evaluator, OptConfig, SearchStrategy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneticParams {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of the bound width.
    pub mutation_scale: f64,
    pub elitism: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        GeneticParams {
            population: 12,
            generations: 20,
            tournament: 3,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            mutation_scale: 0.1,
            elitism: 1,
        }
    }
}

impl GeneticParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if self.population < 4 {
            return Err(Error::Config(format!("population must be at least 4, got {}", self.population)));
        }
        if self.tournament == 0 || self.elitism >= self.population {
            return Err(Error::Config(format!("invalid tournament size or elitism in {self:?}")));
        }
        if !unit(self.crossover_rate) || !unit(self.mutation_rate) || !(self.mutation_scale > 0.0) {
            return Err(Error::Config(format!("invalid genetic rates in {self:?}")));
        }
        Ok(())
    }
}

/// Real-coded genetic algorithm: tournament selection, blend (BLX-0.5)
/// crossover, Gaussian mutation and elitism. The seed point joins the initial
/// population; generations continue while the budget covers a full one.
pub struct GeneticSearch;

const BLEND: f64 = 0.5;

impl SearchStrategy for GeneticSearch {
    fn name(&self) -> &'static str {
        "genetic"
    }

    fn search(&self, ev: &Evaluator<'_>, start: &Candidate, cfg: &OptConfig, budget: usize) -> Result<Vec<f64>> {
        let gp = &cfg.genetic;
        let b = ev.bounds;
        let n = b.dim();
        if budget < gp.population - 1 {
            return Err(Error::Config(format!(
                "genetic search needs {} evaluations for its first population, budget leaves {budget}",
                gp.population - 1
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2);
        let xs: Vec<Vec<f64>> = (1..gp.population)
            .map(|_| (0..n).map(|i| b.lower[i] + rng.random::<f64>() * b.width(i)).collect())
            .collect();
        let mut pop = vec![start.clone()];
        pop.extend(ev.evaluate_all(&xs, Effort::Search)?);
        let mut used = xs.len();
        let children = gp.population - gp.elitism;
        let normal = Normal::new(0.0, 1.0).expect("standard normal");

        for _ in 0..gp.generations {
            if used + children > budget {
                break;
            }
            sort(&mut pop, ev.limit);
            let mut next: Vec<Vec<f64>> = Vec::with_capacity(children);
            while next.len() < children {
                let p1 = &pop[tournament(&pop, gp.tournament, ev.limit, &mut rng)].x;
                let p2 = &pop[tournament(&pop, gp.tournament, ev.limit, &mut rng)].x;
                let mut child: Vec<f64> = if rng.random::<f64>() < gp.crossover_rate {
                    p1.iter()
                        .zip(p2)
                        .map(|(a, c)| {
                            let (lo, hi) = (a.min(*c), a.max(*c));
                            let d = hi - lo;
                            lo - BLEND * d + rng.random::<f64>() * (1.0 + 2.0 * BLEND) * d
                        })
                        .collect()
                } else {
                    p1.clone()
                };
                for (i, g) in child.iter_mut().enumerate() {
                    if rng.random::<f64>() < gp.mutation_rate {
                        *g += gp.mutation_scale * b.width(i) * normal.sample(&mut rng);
                    }
                }
                next.push(b.clip(&child));
            }
            let evaluated = ev.evaluate_all(&next, Effort::Search)?;
            used += evaluated.len();
            pop.truncate(gp.elitism);
            pop.extend(evaluated);
        }
        sort(&mut pop, ev.limit);
        Ok(pop[0].x.clone())
    }
}

fn sort(pop: &mut [Candidate], limit: f64) {
    pop.sort_by(|a, b| {
        if a.better_than(b, limit) {
            std::cmp::Ordering::Less
        } else if b.better_than(a, limit) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
}

fn tournament(pop: &[Candidate], k: usize, limit: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..k {
        let j = rng.random_range(0..pop.len());
        if pop[j].better_than(&pop[best], limit) {
            best = j;
        }
    }
    best
}
