use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Candidate, Effort, Evaluator, OptConfig};
use crate::error::Result;

/// Evaluates `cfg.seed_samples` uniform points at seed effort and returns the best,
/// re-evaluated at search effort so the strategy compares like with like.
pub fn seed_search(ev: &Evaluator<'_>, cfg: &OptConfig) -> Result<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let b = ev.bounds;
    let xs: Vec<Vec<f64>> = (0..cfg.seed_samples)
        .map(|_| (0..b.dim()).map(|i| b.lower[i] + rng.random::<f64>() * b.width(i)).collect())
        .collect();
    let cands = ev.evaluate_all(&xs, Effort::Seed)?;
    let best = ev.best(&cands).expect("at least one seed sample").x.clone();
    if cfg.budget > cfg.seed_samples {
        ev.evaluate(&best, Effort::Search)
    } else {
        Ok(cands.into_iter().find(|c| c.x == best).expect("best is a sample"))
    }
}
