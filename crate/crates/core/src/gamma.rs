//! Gamma-process mathematics: increment laws, first-passage laws and sampling.
//!
//! A stationary gamma process with shape rate `α` and rate `β` has independent
//! increments `X(t) - X(s) ~ Gamma(α (t - s), β)`. The first passage time of a
//! level `z` satisfies `P(σ_z ≤ t) = P(X(t) ≥ z) = Q(α t, β z)`.
//!
//! Sampling uses `rand_distr::Gamma` (Marsaglia–Tsang squeeze/rejection for
//! shape ≥ 1, and the `G(a + 1) · U^{1/a}` boost for shape < 1), which is exact
//! for any positive shape.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma_p, gamma_q, ln_gamma};
use crate::stats::EstimateWithError;

/// Parameters of a stationary gamma process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    /// Shape accumulated per unit time (α).
    pub shape_rate: f64,
    /// Inverse scale (β).
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape_rate: f64, rate: f64) -> Result<Self> {
        let p = GammaParams { shape_rate, rate };
        p.validate()?;
        Ok(p)
    }

    /// Builds the process from a scale parameter (`rate = 1 / scale`).
    pub fn from_scale(shape_rate: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("gamma scale must be positive, got {scale}")));
        }
        GammaParams::new(shape_rate, 1.0 / scale)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape_rate > 0.0 && self.shape_rate.is_finite()) {
            return Err(Error::Domain(format!("gamma shape rate must be positive, got {}", self.shape_rate)));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::Domain(format!("gamma rate must be positive, got {}", self.rate)));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        1.0 / self.rate
    }

    /// Mean degradation accumulated over `duration`.
    pub fn mean(&self, duration: f64) -> f64 {
        self.shape_rate * duration / self.rate
    }

    pub fn variance(&self, duration: f64) -> f64 {
        self.shape_rate * duration / (self.rate * self.rate)
    }

    /// Time at which the mean path reaches `level`.
    pub fn mean_time_to(&self, level: f64) -> f64 {
        level * self.rate / self.shape_rate
    }

    /// Sampling distribution of the increment over `duration`.
    pub fn increment_distribution(&self, duration: f64) -> Result<Gamma<f64>> {
        Gamma::new(self.shape_rate * duration, self.scale())
            .map_err(|e| Error::Domain(format!("cannot build gamma sampler for duration {duration}: {e}")))
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!("duration must be positive, got {duration}")));
    }
    Ok(())
}

/// Density of `X(s + duration) - X(s)` at `x`.
pub fn increment_pdf(p: &GammaParams, duration: f64, x: f64) -> Result<f64> {
    check_duration(duration)?;
    if x.is_nan() {
        return Err(Error::Domain("increment level is NaN".into()));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let k = p.shape_rate * duration;
    if x == 0.0 {
        return Ok(match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => p.rate,
            _ => 0.0,
        });
    }
    let log_f = k * p.rate.ln() - ln_gamma(k) + (k - 1.0) * x.ln() - p.rate * x;
    Ok(log_f.exp())
}

/// Distribution function of the increment over `duration`.
pub fn increment_cdf(p: &GammaParams, duration: f64, x: f64) -> Result<f64> {
    check_duration(duration)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("increment level must be non-negative, got {x}")));
    }
    Ok(gamma_p(p.shape_rate * duration, p.rate * x))
}

/// `P(X(s + duration) - X(s) < x)` allowing a zero duration (the increment is then
/// identically zero, so the value is 1 for any `x > 0`).
pub fn increment_cdf_or_degenerate(p: &GammaParams, duration: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if duration <= 0.0 {
        1.0
    } else {
        gamma_p(p.shape_rate * duration, p.rate * x)
    }
}

/// Survival counterpart of [`increment_cdf_or_degenerate`].
pub fn increment_survival_or_degenerate(p: &GammaParams, duration: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if duration <= 0.0 {
        0.0
    } else {
        gamma_q(p.shape_rate * duration, p.rate * x)
    }
}

/// `P(σ_level ≤ t)`, the distribution of the first time the process reaches `level`.
pub fn first_passage_cdf(p: &GammaParams, level: f64, t: f64) -> Result<f64> {
    if level.is_nan() || level < 0.0 {
        return Err(Error::Domain(format!("passage level must be non-negative, got {level}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("passage time must be non-negative, got {t}")));
    }
    if level == 0.0 {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_q(p.shape_rate * t, p.rate * level))
}

/// Central-difference step used for first-passage densities.
pub fn passage_step(t: f64) -> f64 {
    (1e-4 * t).max(1e-5)
}

/// Density of the first passage time of `level`, by central differences of
/// [`first_passage_cdf`] with step `max(1e-5, 1e-4 t)` (one-sided near zero).
pub fn first_passage_pdf(p: &GammaParams, level: f64, t: f64) -> Result<f64> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::Domain(format!("passage level must be positive, got {level}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("passage time must be positive, got {t}")));
    }
    let h = passage_step(t);
    if t + h == t {
        return Err(Error::Numerical(format!("finite-difference step underflows at t = {t}")));
    }
    let (lo, hi) = if t - h > 0.0 { (t - h, t + h) } else { (t, t + h) };
    let d = (first_passage_cdf(p, level, hi)? - first_passage_cdf(p, level, lo)?) / (hi - lo);
    Ok(d.max(0.0))
}

/// Draws `X(s + duration) - X(s)`.
pub fn sample_increment<R: Rng + ?Sized>(p: &GammaParams, duration: f64, rng: &mut R) -> Result<f64> {
    check_duration(duration)?;
    Ok(p.increment_distribution(duration)?.sample(rng))
}

/// Splits a block increment `total` into cell increments with exact joint law.
///
/// For independent `G_j ~ Gamma(a_j)`, the proportions `G_j / Σ G` are Dirichlet and
/// independent of `Σ G`, so scaling `n` independent cell draws to sum to `total`
/// reproduces the conditional law of the cells given the block total.
pub fn dirichlet_split<R: Rng + ?Sized>(total: f64, cell: &Gamma<f64>, out: &mut [f64], rng: &mut R) {
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = cell.sample(rng);
        sum += *o;
    }
    if sum > 0.0 && sum.is_finite() {
        let s = total / sum;
        out.iter_mut().for_each(|o| *o *= s);
    } else {
        // Every cell underflowed to zero; the block mass sits in a single cell.
        out.iter_mut().for_each(|o| *o = 0.0);
        let j = rng.random_range(0..out.len());
        out[j] = total;
    }
}

/// Cells per block when walking a path toward a passage level.
const PASSAGE_BLOCK: usize = 32;

/// Grid-resolved passage times `(σ_M, σ_L)` of one path started at 0: the first
/// grid point `j δ` with level `≥ M` (resp. `≥ L`).
pub fn sample_passage_pair<R: Rng + ?Sized>(
    p: &GammaParams,
    m_level: f64,
    l_level: f64,
    grid_step: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_duration(grid_step)?;
    let cell = p.increment_distribution(grid_step)?;
    let block = p.increment_distribution(grid_step * PASSAGE_BLOCK as f64)?;
    let mut cells = [0.0; PASSAGE_BLOCK];
    let mut level = 0.0;
    let mut idx: u64 = 0;
    let mut sigma_m = if m_level <= 0.0 { Some(0.0) } else { None };
    loop {
        let inc = block.sample(rng);
        let target = if sigma_m.is_none() { m_level } else { l_level };
        if level + inc < target {
            level += inc;
            idx += PASSAGE_BLOCK as u64;
            continue;
        }
        dirichlet_split(inc, &cell, &mut cells, rng);
        let start = level;
        for (j, c) in cells.iter().enumerate() {
            level += c;
            if j == PASSAGE_BLOCK - 1 {
                level = start + inc;
            }
            let t = (idx + j as u64 + 1) as f64 * grid_step;
            if sigma_m.is_none() && level >= m_level {
                sigma_m = Some(t);
            }
            if level >= l_level {
                return Ok((sigma_m.unwrap_or(t), t));
            }
        }
        idx += PASSAGE_BLOCK as u64;
    }
}

/// Empirical law of `σ_L - σ_M` built from simulated grid paths.
#[derive(Debug, Clone)]
pub struct PassageGapSample {
    gaps: Vec<f64>,
}

impl PassageGapSample {
    pub fn simulate<R: Rng + ?Sized>(
        p: &GammaParams,
        m_level: f64,
        l_level: f64,
        paths: usize,
        grid_step: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(m_level > 0.0 && l_level > m_level) {
            return Err(Error::Domain(format!("need 0 < M < L, got M = {m_level}, L = {l_level}")));
        }
        if paths < 100 {
            return Err(Error::Domain(format!("at least 100 paths are required, got {paths}")));
        }
        let mut gaps = (0..paths)
            .map(|_| sample_passage_pair(p, m_level, l_level, grid_step, rng).map(|(m, l)| l - m))
            .collect::<Result<Vec<_>>>()?;
        gaps.sort_by(f64::total_cmp);
        Ok(PassageGapSample { gaps })
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Estimate of `P(σ_L - σ_M > t)`.
    pub fn survival(&self, t: f64) -> EstimateWithError {
        let above = self.gaps.len() - self.gaps.partition_point(|&g| g <= t);
        EstimateWithError::proportion(above, self.gaps.len())
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }
}

/// Monte Carlo simulation effort for [`sigma_diff_survival`].
#[derive(Debug, Clone, Copy)]
pub struct PassageEffort {
    pub paths: usize,
    pub grid_step: f64,
}

impl Default for PassageEffort {
    fn default() -> Self {
        PassageEffort { paths: 100_000, grid_step: 0.01 }
    }
}

/// Monte Carlo estimate of `P(σ_L - σ_M > t)` from grid-resolved paths.
pub fn sigma_diff_survival<R: Rng + ?Sized>(
    p: &GammaParams,
    m_level: f64,
    l_level: f64,
    t: f64,
    effort: PassageEffort,
    rng: &mut R,
) -> Result<EstimateWithError> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let sample = PassageGapSample::simulate(p, m_level, l_level, effort.paths, effort.grid_step, rng)?;
    Ok(sample.survival(t))
}
