//! Quadrature evaluation of single-cycle quantities from a fixed post-maintenance
//! state, for systems with at most two degrading components.
//!
//! Inspections fall at `T_1 = w` and `T_k = w + (k−1) T`. For component `j` write
//! `a_j = M_j − x_j`, `b_j = L_j − x_j` and
//!
//! `H_j(s, t) = P(σ_{a_j} > s, σ_{b_j} > t)`,
//!
//! the probability that the component passes the inspection at `s` and is still
//! working at `t`. For `0 < s < t` this is `∫_0^{a} f_{αs}(y) F_{α(t−s)}(b − y) dy`;
//! the boundary cases reduce to single incomplete-gamma values. Every quantity of
//! interval `k` is a one-dimensional integral over the first failure time `w` in
//! `(T_{k−1}, T_k]`, with maintenance at `w* = min(w + τ, T_k)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{first_passage_pdf, increment_cdf_or_degenerate, increment_pdf, GammaParams, PassageGapSample};
use crate::model::{ComponentSpec, PolicyVector, StartState, SystemSpec};
use crate::quad::{integrate, integrate_pieces, QuadOptions};

/// Largest number of degrading components the oracle accepts.
pub const MAX_COMPONENTS: usize = 2;
/// Residual probability below which the sum over inspection intervals stops.
pub const TRUNCATION_MASS: f64 = 1e-9;
pub const MAX_INTERVALS: usize = 10_000;

/// Source of `P(σ_L − σ_M > t)` for [`g_integral`].
pub trait GapSurvival {
    fn gap_survival(&self, t: f64) -> f64;
}

impl GapSurvival for PassageGapSample {
    fn gap_survival(&self, t: f64) -> f64 {
        self.survival(t).mean
    }
}

impl<F: Fn(f64) -> f64> GapSurvival for F {
    fn gap_survival(&self, t: f64) -> f64 {
        self(t)
    }
}

#[allow(clippy::too_many_arguments)]
/// `∫_{w1}^{w2} f_{σ_{M−x}}(u) · F̄_{σ_{L−x} − σ_{M−x}}(w3 − u) du`.
///
/// The gap law is supplied by the caller (typically a simulated
/// [`PassageGapSample`] for levels `M − x` and `L − x`); this treats the gap as
/// independent of `σ_{M−x}`. [`g_exact`] gives the same probability without that
/// approximation.
pub fn g_integral<S: GapSurvival + ?Sized>(
    c: &ComponentSpec,
    m_level: f64,
    x: f64,
    w1: f64,
    w2: f64,
    w3: f64,
    gap: &S,
    opts: QuadOptions,
) -> Result<f64> {
    if !(w1 >= 0.0 && w1 <= w2 && w3 >= w1) {
        return Err(Error::Domain(format!("need 0 ≤ w1 ≤ w2 and w3 ≥ w1, got ({w1}, {w2}, {w3})")));
    }
    let level = m_level - x;
    if level <= 0.0 {
        return Err(Error::Domain(format!("start level {x} is not below the preventive threshold {m_level}")));
    }
    if w2 == w1 {
        return Ok(0.0);
    }
    let f = |u: f64| match first_passage_pdf(&c.gamma, level, u) {
        Ok(d) => d * gap.gap_survival(w3 - u),
        Err(_) => f64::NAN,
    };
    let r = integrate(f, w1, w2, opts)?;
    if !r.value.is_finite() {
        return Err(Error::Numerical(format!("g integrand is not finite on [{w1}, {w2}]")));
    }
    Ok(r.value)
}

/// `P(σ_{M−x} ∈ (w1, w2], σ_{L−x} > w3)` for `w2 ≤ w3`, evaluated through the joint survival function.
pub fn g_exact(c: &ComponentSpec, m_level: f64, x: f64, w1: f64, w2: f64, w3: f64, opts: QuadOptions) -> Result<f64> {
    let law = Law { g: c.gamma, a: m_level - x, b: c.failure_threshold - x, opts };
    Ok((law.h(w1, w3)? - law.h(w2, w3)?).max(0.0))
}

/// Passage levels of one component measured from its start level.
#[derive(Clone, Copy)]
struct Law {
    g: GammaParams,
    a: f64,
    b: f64,
    opts: QuadOptions,
}

impl Law {
    /// `P(σ_a > s, σ_b > t)`; `s ≤ 0` drops the first condition.
    fn h(&self, s: f64, t: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(increment_cdf_or_degenerate(&self.g, t, self.b));
        }
        if self.a <= 0.0 {
            return Ok(0.0);
        }
        if s >= t {
            return Ok(increment_cdf_or_degenerate(&self.g, s, self.a));
        }
        let fb = increment_cdf_or_degenerate(&self.g, t - s, self.b);
        let inner = |y: f64| {
            let f = increment_pdf(&self.g, s, y).unwrap_or(0.0);
            f * (increment_cdf_or_degenerate(&self.g, t - s, self.b - y) - fb)
        };
        let r = integrate(inner, 0.0, self.a, self.opts)?;
        Ok((r.value + fb * increment_cdf_or_degenerate(&self.g, s, self.a)).clamp(0.0, 1.0))
    }

    /// `−∂_t H(s, t)` for `t > max(s, 0)`: density of the failure time jointly with passing at `s`.
    fn q(&self, s: f64, t: f64) -> Result<f64> {
        if s <= 0.0 {
            return first_passage_pdf(&self.g, self.b, t);
        }
        if self.a <= 0.0 {
            return Ok(0.0);
        }
        let dt = t - s;
        let pdf = |level: f64| first_passage_pdf(&self.g, level, dt);
        let fb = pdf(self.b)?;
        let inner = |y: f64| {
            let f = increment_pdf(&self.g, s, y).unwrap_or(0.0);
            match pdf(self.b - y) {
                Ok(d) => f * (d - fb),
                Err(_) => f64::NAN,
            }
        };
        let r = integrate(inner, 0.0, self.a, self.opts)?;
        if !r.value.is_finite() {
            return Err(Error::Numerical(format!("failure-time density not finite at ({s}, {t})")));
        }
        Ok((r.value + fb * increment_cdf_or_degenerate(&self.g, s, self.a)).max(0.0))
    }
}

/// Expected single-cycle quantities restricted to cycles ending in one inspection interval.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalQuantities {
    pub k: usize,
    pub start: f64,
    pub end: f64,
    /// Probability that the cycle ends in `(T_{k−1}, T_k]`, in closed form.
    pub end_probability: f64,
    /// The same probability assembled from the quadrature pieces.
    pub quadrature_mass: f64,
    pub corrective: Vec<f64>,
    pub preventive: Vec<f64>,
    pub nondegrading: f64,
    pub downtime: Vec<f64>,
    pub nondegrading_downtime: f64,
    /// `E[O · 1{cycle ends in interval k}]`.
    pub length: f64,
}

/// Quantities summed over all inspection intervals.
#[derive(Debug, Clone, Serialize)]
pub struct CycleTotals {
    pub corrective: Vec<f64>,
    pub preventive: Vec<f64>,
    pub nondegrading: f64,
    pub downtime: Vec<f64>,
    pub nondegrading_downtime: f64,
    pub expected_length: f64,
    pub total_mass: f64,
    pub intervals: Vec<IntervalQuantities>,
}

/// Evaluator bound to one system, policy and start state.
pub struct Oracle<'a> {
    s: &'a SystemSpec,
    p: &'a PolicyVector,
    st: &'a StartState,
    laws: Vec<Law>,
    opts: QuadOptions,
}

impl<'a> Oracle<'a> {
    pub fn new(s: &'a SystemSpec, p: &'a PolicyVector, st: &'a StartState) -> Result<Self> {
        Self::with_options(s, p, st, QuadOptions::tol(1e-11, 1e-9))
    }

    pub fn with_options(s: &'a SystemSpec, p: &'a PolicyVector, st: &'a StartState, opts: QuadOptions) -> Result<Self> {
        if s.m() > MAX_COMPONENTS {
            return Err(Error::UnsupportedDimension(format!(
                "the quadrature oracle handles at most {MAX_COMPONENTS} degrading components, got {}",
                s.m()
            )));
        }
        s.validate()?;
        p.validate(s)?;
        st.validate(s, p)?;
        let inner = QuadOptions { abs_tol: opts.abs_tol * 0.1, ..opts };
        let laws = s
            .components
            .iter()
            .zip(&p.preventive_thresholds)
            .zip(&st.levels)
            .map(|((c, &m), &x)| Law { g: c.gamma, a: m - x, b: c.failure_threshold - x, opts: inner })
            .collect();
        Ok(Oracle { s, p, st, laws, opts })
    }

    pub fn inspection_time(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.st.time_to_inspection + (k - 1) as f64 * self.p.inspection_period
        }
    }

    /// Probability that every inspection up to and including `t` is passed with nothing failed.
    fn pass_probability(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let t = self.inspection_time(k);
        let mut a = (-self.s.nondegrading_rate * t).exp();
        for law in &self.laws {
            a *= increment_cdf_or_degenerate(&law.g, t, law.a);
        }
        a
    }

    fn ey(&self, w: f64) -> f64 {
        (-self.s.nondegrading_rate * w).exp()
    }

    /// `(H_j, q_j)` at time `w` for each component, conditioned on passing at `lo`.
    fn point(&self, lo: f64, w: f64) -> Result<Vec<(f64, f64)>> {
        self.laws.iter().map(|l| Ok((l.h(lo, w)?, l.q(lo, w)?))).collect()
    }

    /// `R_i(w) = ∏_{j≠i} H_j · e^{−λw}` and its negative derivative.
    fn others(&self, pt: &[(f64, f64)], i: Option<usize>, ey: f64) -> (f64, f64) {
        let lambda = self.s.nondegrading_rate;
        let mut prod = 1.0;
        for (j, &(h, _)) in pt.iter().enumerate() {
            if Some(j) != i {
                prod *= h;
            }
        }
        let mut dprod = 0.0;
        for (j, &(_, q)) in pt.iter().enumerate() {
            if Some(j) == i {
                continue;
            }
            let mut term = q;
            for (l, &(h, _)) in pt.iter().enumerate() {
                if l != j && Some(l) != i {
                    term *= h;
                }
            }
            dprod += term;
        }
        (prod * ey, (dprod + lambda * prod) * ey)
    }

    fn window(&self, w: f64, hi: f64) -> f64 {
        (w + self.s.delay).min(hi)
    }

    fn integrate_interval<F: Fn(f64) -> Result<f64>>(&self, lo: f64, hi: f64, f: F) -> Result<f64> {
        let kink = (hi - self.s.delay).max(lo);
        // Errors inside the integrand are parked here and reported after the integration.
        let cell = std::cell::RefCell::new(None::<Error>);
        let g = |w: f64| match f(w) {
            Ok(v) => v,
            Err(e) => {
                cell.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let r = integrate_pieces(g, &[lo, kink, hi], self.opts)?;
        if let Some(e) = cell.into_inner() {
            return Err(e);
        }
        Ok(r.value)
    }

    /// All quantities of interval `k ≥ 1`.
    pub fn interval(&self, k: usize) -> Result<IntervalQuantities> {
        if k == 0 {
            return Err(Error::Domain("inspection intervals are numbered from 1".into()));
        }
        let m = self.s.m();
        let lambda = self.s.nondegrading_rate;
        let lo = self.inspection_time(k - 1);
        let hi = self.inspection_time(k);

        let mut corrective = vec![0.0; m];
        let mut preventive = vec![0.0; m];
        let mut downtime = vec![0.0; m];
        let pt_hi = self.point_h(lo, hi)?;
        for i in 0..m {
            let law = self.laws[i];
            corrective[i] = self.integrate_interval(lo, hi, |w| {
                let pt = self.point(lo, w)?;
                let ws = self.window(w, hi);
                let (r, dr) = self.others(&pt, Some(i), self.ey(w));
                Ok(pt[i].1 * r + dr * (pt[i].0 - law.h(lo, ws)?))
            })?;
            let (r_hi, _) = self.others(&pt_hi, Some(i), self.ey(hi));
            let at_inspection = (pt_hi[i].0 - law.h(hi, hi)?) * r_hi;
            preventive[i] = at_inspection
                + self.integrate_interval(lo, hi, |w| {
                    let pt = self.point(lo, w)?;
                    let ws = self.window(w, hi);
                    let (_, dr) = self.others(&pt, Some(i), self.ey(w));
                    Ok(dr * (law.h(lo, ws)? - law.h(ws, ws)?))
                })?;
            downtime[i] = self.integrate_interval(lo, hi, |w| {
                let pt = self.point(lo, w)?;
                let ws = self.window(w, hi);
                let (r, dr) = self.others(&pt, Some(i), self.ey(w));
                let waiting = if ws > w {
                    let hw = pt[i].0;
                    integrate(|z| hw - law.h(lo, z).unwrap_or(f64::NAN), w, ws, self.opts)?.value
                } else {
                    0.0
                };
                Ok(pt[i].1 * r * (ws - w) + dr * waiting)
            })?;
        }

        // φ = density of the first failure (any source), split into its degrading and exponential parts.
        let split = |w: f64| -> Result<(f64, f64)> {
            let pt = self.point(lo, w)?;
            let (s_all, phi) = self.others(&pt, None, self.ey(w));
            Ok((lambda * s_all, phi - lambda * s_all))
        };
        let nondegrading = self.integrate_interval(lo, hi, |w| {
            let (first, degrading) = split(w)?;
            let d = self.window(w, hi) - w;
            Ok(first + degrading * -(-lambda * d).exp_m1())
        })?;
        let nondegrading_downtime = self.integrate_interval(lo, hi, |w| {
            let (first, degrading) = split(w)?;
            let d = self.window(w, hi) - w;
            let waiting = if lambda > 0.0 { d + (-lambda * d).exp_m1() / lambda } else { 0.0 };
            Ok(first * d + degrading * waiting)
        })?;

        let (s_hi, _) = self.others(&pt_hi, None, self.ey(hi));
        let mut all_pass = self.ey(hi);
        for law in &self.laws {
            all_pass *= law.h(hi, hi)?;
        }
        let no_failure_end = s_hi - all_pass;
        let failure_mass = self.integrate_interval(lo, hi, |w| {
            let (first, degrading) = split(w)?;
            Ok(first + degrading)
        })?;
        let failure_length = self.integrate_interval(lo, hi, |w| {
            let (first, degrading) = split(w)?;
            Ok((first + degrading) * self.window(w, hi))
        })?;

        Ok(IntervalQuantities {
            k,
            start: lo,
            end: hi,
            end_probability: self.pass_probability(k - 1) - self.pass_probability(k),
            quadrature_mass: no_failure_end + failure_mass,
            corrective,
            preventive,
            nondegrading,
            downtime,
            nondegrading_downtime,
            length: hi * no_failure_end + failure_length,
        })
    }

    /// `(H_j(lo, hi), 0)`: the survival part only, at the inspection epoch.
    fn point_h(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        self.laws.iter().map(|l| Ok((l.h(lo, hi)?, 0.0))).collect()
    }

    /// Sums interval quantities until the probability of reaching the next interval drops below
    /// [`TRUNCATION_MASS`].
    pub fn totals(&self) -> Result<CycleTotals> {
        let m = self.s.m();
        let mut t = CycleTotals {
            corrective: vec![0.0; m],
            preventive: vec![0.0; m],
            nondegrading: 0.0,
            downtime: vec![0.0; m],
            nondegrading_downtime: 0.0,
            expected_length: 0.0,
            total_mass: 0.0,
            intervals: Vec::new(),
        };
        for k in 1..=MAX_INTERVALS {
            let q = self.interval(k)?;
            for i in 0..m {
                t.corrective[i] += q.corrective[i];
                t.preventive[i] += q.preventive[i];
                t.downtime[i] += q.downtime[i];
            }
            t.nondegrading += q.nondegrading;
            t.nondegrading_downtime += q.nondegrading_downtime;
            t.expected_length += q.length;
            t.total_mass += q.quadrature_mass;
            t.intervals.push(q);
            if self.pass_probability(k) < TRUNCATION_MASS {
                return Ok(t);
            }
        }
        Err(Error::Numerical(format!(
            "residual probability still {:.3e} after {MAX_INTERVALS} inspection intervals",
            self.pass_probability(MAX_INTERVALS)
        )))
    }
}

/// Probability that component `i` is correctively replaced in a cycle ending in interval `k`.
pub fn prob_corrective(s: &SystemSpec, p: &PolicyVector, st: &StartState, i: usize, k: usize) -> Result<f64> {
    check_index(s, i)?;
    Ok(Oracle::new(s, p, st)?.interval(k)?.corrective[i])
}

/// Probability that the non-degrading part is repaired in a cycle ending in interval `k`.
pub fn prob_nondegrading_repair(s: &SystemSpec, p: &PolicyVector, st: &StartState, k: usize) -> Result<f64> {
    Ok(Oracle::new(s, p, st)?.interval(k)?.nondegrading)
}

/// Probability that component `i` is preventively replaced in a cycle ending in interval `k`.
pub fn prob_preventive(s: &SystemSpec, p: &PolicyVector, st: &StartState, i: usize, k: usize) -> Result<f64> {
    check_index(s, i)?;
    Ok(Oracle::new(s, p, st)?.interval(k)?.preventive[i])
}

/// Expected downtime `(non-degrading, per component)` accrued in a cycle ending in interval `k`.
pub fn expected_downtime(s: &SystemSpec, p: &PolicyVector, st: &StartState, k: usize) -> Result<(f64, Vec<f64>)> {
    let q = Oracle::new(s, p, st)?.interval(k)?;
    Ok((q.nondegrading_downtime, q.downtime))
}

/// Expected time from `st` to the next maintenance action.
pub fn expected_cycle_length(s: &SystemSpec, p: &PolicyVector, st: &StartState) -> Result<f64> {
    Ok(Oracle::new(s, p, st)?.totals()?.expected_length)
}

fn check_index(s: &SystemSpec, i: usize) -> Result<()> {
    if i >= s.m() {
        return Err(Error::Domain(format!("component index {i} out of range for {} components", s.m())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::first_passage_cdf;
    use crate::model::presets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> (SystemSpec, PolicyVector) {
        (presets::identical(1), PolicyVector::new(4.317, vec![3.075]))
    }

    #[test]
    fn refuses_three_components() {
        let s = presets::identical(3);
        let p = PolicyVector::new(4.0, vec![3.0; 3]);
        let st = StartState::renewal(&s, &p);
        assert!(matches!(Oracle::new(&s, &p, &st), Err(Error::UnsupportedDimension(_))));
        assert!(matches!(expected_cycle_length(&s, &p, &st), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn interval_masses_are_exhaustive() {
        let (s, p) = one();
        let st = StartState::renewal(&s, &p);
        let t = Oracle::new(&s, &p, &st).unwrap().totals().unwrap();
        assert!((t.total_mass - 1.0).abs() < 1e-6, "{}", t.total_mass);
        for q in &t.intervals {
            assert!((q.quadrature_mass - q.end_probability).abs() < 1e-8);
            for v in [q.corrective[0], q.preventive[0], q.nondegrading] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        // Corrective and preventive actions on one component are exclusive; at least one
        // action happens in every cycle.
        assert!(t.corrective[0] + t.preventive[0] <= 1.0 + 1e-9);
        assert!(t.corrective[0] + t.preventive[0] + t.nondegrading >= 1.0 - 1e-9);
        assert!(t.downtime[0] <= s.delay * t.corrective[0] + 1e-12);
        assert!(t.nondegrading_downtime <= s.delay * t.nondegrading + 1e-12);
    }

    #[test]
    fn two_component_mass_from_off_renewal_state() {
        let s = presets::graded(2);
        let p = PolicyVector::new(5.998, vec![2.679, 2.014]);
        let st = StartState { levels: vec![1.2, 0.4], time_to_inspection: 2.5 };
        let t = Oracle::new(&s, &p, &st).unwrap().totals().unwrap();
        assert!((t.total_mass - 1.0).abs() < 1e-6, "{}", t.total_mass);
    }

    #[test]
    fn no_nondegrading_failures_without_rate() {
        let (mut s, p) = one();
        s.nondegrading_rate = 0.0;
        let st = StartState::renewal(&s, &p);
        let t = Oracle::new(&s, &p, &st).unwrap().totals().unwrap();
        assert_eq!(t.nondegrading, 0.0);
        assert_eq!(t.nondegrading_downtime, 0.0);
    }

    #[test]
    fn zero_delay_has_no_waiting() {
        let (mut s, p) = one();
        s.delay = 0.0;
        let st = StartState::renewal(&s, &p);
        let t = Oracle::new(&s, &p, &st).unwrap().totals().unwrap();
        assert!(t.downtime[0].abs() < 1e-12);
        assert!(t.nondegrading_downtime.abs() < 1e-12);
        assert!((t.total_mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_preventive_band() {
        let (s, _) = one();
        let p = PolicyVector::new(4.317, vec![6.0]);
        let st = StartState::renewal(&s, &p);
        for k in 1..=3 {
            assert!(prob_preventive(&s, &p, &st, 0, k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn nothing_happens_before_an_immediate_inspection() {
        let (s, p) = one();
        let st = StartState { levels: vec![0.0], time_to_inspection: 1e-6 };
        assert!(prob_corrective(&s, &p, &st, 0, 1).unwrap() < 1e-12);
        assert!(prob_preventive(&s, &p, &st, 0, 1).unwrap() < 1e-8);
        assert!(prob_nondegrading_repair(&s, &p, &st, 1).unwrap() < 1e-7);
    }

    #[test]
    fn tiny_preventive_threshold_ends_at_first_inspection() {
        let (mut s, _) = one();
        s.nondegrading_rate = 0.0;
        let p = PolicyVector::new(4.317, vec![1e-6]);
        // Left to chance: X(1) < 1e-6 (probability ~6e-8) or X(1) ≥ L (~1e-5).
        let st = StartState { levels: vec![0.0], time_to_inspection: 1.0 };
        let e = expected_cycle_length(&s, &p, &st).unwrap();
        assert!((e - 1.0).abs() < 5e-5, "{e}");
    }

    #[test]
    fn fast_nondegrading_failure_ends_cycle_immediately() {
        let (mut s, p) = one();
        s.delay = 0.0;
        s.nondegrading_rate = 1e3;
        let st = StartState::renewal(&s, &p);
        let e = expected_cycle_length(&s, &p, &st).unwrap();
        assert!((e - 1e-3).abs() < 1e-6, "{e}");
    }

    #[test]
    fn stable_under_tolerance_halving() {
        let s = presets::identical(2);
        let p = PolicyVector::new(4.317, vec![3.075, 3.075]);
        let st = StartState { levels: vec![0.5, 1.5], time_to_inspection: 3.0 };
        let a = Oracle::with_options(&s, &p, &st, QuadOptions::tol(2e-10, 2e-8)).unwrap().interval(2).unwrap();
        let b = Oracle::with_options(&s, &p, &st, QuadOptions::tol(1e-10, 1e-8)).unwrap().interval(2).unwrap();
        let pairs = [
            (a.corrective[0], b.corrective[0]),
            (a.preventive[1], b.preventive[1]),
            (a.nondegrading, b.nondegrading),
            (a.downtime[0], b.downtime[0]),
            (a.length, b.length),
        ];
        for (x, y) in pairs {
            assert!((x - y).abs() <= 1e-4 * y.abs().max(1e-8), "{x} vs {y}");
        }
    }

    #[test]
    fn g_integral_limits() {
        let c = presets::component(1.25, 2.0);
        let opts = QuadOptions::tol(1e-10, 1e-8);
        let one = |_t: f64| 1.0;
        assert_eq!(g_integral(&c, 3.075, 0.0, 1.0, 1.0, 2.0, &one, opts).unwrap(), 0.0);
        let v = g_integral(&c, 3.075, 0.5, 1.0, 3.0, 3.0, &one, opts).unwrap();
        let exact =
            first_passage_cdf(&c.gamma, 2.575, 3.0).unwrap() - first_passage_cdf(&c.gamma, 2.575, 1.0).unwrap();
        assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
        assert!(g_integral(&c, 3.075, 0.0, 2.0, 1.0, 2.0, &one, opts).is_err());
    }

    #[test]
    fn g_values_against_monte_carlo() {
        let c = presets::component(1.25, 2.0);
        let t = 4.317;
        let opts = QuadOptions::tol(1e-10, 1e-8);
        // For the window (0, T, T) the probability is P(M ≤ X(T) < L); reference from an
        // independent incomplete-gamma evaluation.
        let exact = g_exact(&c, 3.075, 0.0, 0.0, t, t, opts).unwrap();
        assert!((exact - 0.313_788_174_364_000_4).abs() < 1e-9, "{exact}");

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let gaps = PassageGapSample::simulate(&c.gamma, 3.075, 6.0, 100_000, 0.005, &mut rng).unwrap();
        // The empirical survival is a step function, so a looser tolerance is used.
        let approx = g_integral(&c, 3.075, 0.0, 0.0, t, t, &gaps, QuadOptions::tol(1e-6, 1e-6)).unwrap();
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            let (sm, sl) = crate::gamma::sample_passage_pair(&c.gamma, 3.075, 6.0, 0.005, &mut rng).unwrap();
            hits += (sm <= t && sl > t) as usize;
        }
        let mc = crate::stats::EstimateWithError::proportion(hits, n);
        // Grid resolution and the independence of gap and passage time each shift the
        // estimate by well under 0.005 here.
        assert!((approx - mc.mean).abs() < 3.0 * mc.std_error + 0.005, "{approx} vs {}", mc.mean);
        assert!((exact - mc.mean).abs() < 3.0 * mc.std_error + 0.003, "{exact} vs {}", mc.mean);
    }
}
