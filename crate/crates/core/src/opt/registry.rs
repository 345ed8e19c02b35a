use super::{Candidate, Evaluator, GeneticSearch, OptConfig, PatternSearch};
use crate::error::{Error, Result};

/// A search method. `search` starts from an already evaluated seed point and may
/// spend at most `budget` further evaluations; it returns the best point found.
pub trait SearchStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn search(&self, ev: &Evaluator<'_>, start: &Candidate, cfg: &OptConfig, budget: usize) -> Result<Vec<f64>>;
}

/// Strategies addressable by name.
pub struct Registry {
    strategies: Vec<Box<dyn SearchStrategy>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { strategies: Vec::new() }
    }

    /// Pattern search and the genetic algorithm.
    pub fn with_defaults() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(PatternSearch));
        r.register(Box::new(GeneticSearch));
        r
    }

    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, s: Box<dyn SearchStrategy>) {
        self.strategies.retain(|x| x.name() != s.name());
        self.strategies.push(s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn SearchStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::Config(format!("unknown optimization method '{name}' (known: {:?})", self.names())))
    }
}
