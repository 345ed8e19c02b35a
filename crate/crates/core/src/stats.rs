use serde::{Deserialize, Serialize};

/// Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    /// Number of independent units (replications or draws) behind the estimate.
    pub n: usize,
}

impl EstimateWithError {
    pub fn exact(value: f64) -> Self {
        EstimateWithError { mean: value, std_error: 0.0, n: usize::MAX }
    }

    /// Sample mean and standard error of independent observations.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let std_error = if n >= 2 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        EstimateWithError { mean, std_error, n }
    }

    /// Binomial proportion `successes / trials`.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        let p = successes as f64 / trials.max(1) as f64;
        EstimateWithError { mean: p, std_error: (p * (1.0 - p) / trials.max(1) as f64).sqrt(), n: trials }
    }

    /// Ratio estimator `Σ num / Σ den` over replications, with the delta-method
    /// standard error computed from between-replication residuals.
    pub fn ratio(nums: &[f64], dens: &[f64]) -> Self {
        debug_assert_eq!(nums.len(), dens.len());
        let n = nums.len();
        let total_den: f64 = dens.iter().sum();
        let r = nums.iter().sum::<f64>() / total_den;
        let std_error = if n >= 2 {
            let mean_den = total_den / n as f64;
            let ss: f64 = nums.iter().zip(dens).map(|(c, l)| (c - r * l).powi(2)).sum();
            (ss / ((n * (n - 1)) as f64)).sqrt() / mean_den
        } else {
            f64::INFINITY
        };
        EstimateWithError { mean: r, std_error, n }
    }

    /// `(self - other) / sqrt(se_self² + se_other²)`.
    pub fn z_against(&self, other: &EstimateWithError) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        if se == 0.0 {
            if self.mean == other.mean {
                0.0
            } else {
                f64::INFINITY.copysign(self.mean - other.mean)
            }
        } else {
            (self.mean - other.mean) / se
        }
    }
}
