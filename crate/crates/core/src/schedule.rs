use crate::error::{Error, Result};
use crate::numerics::brent_min;

/// A regularization sequence `t ↦ σ_t`.
pub trait RegularizationSequence {
    fn sigma(&self, t: usize) -> f64;
}

impl<F: Fn(usize) -> f64> RegularizationSequence for F {
    fn sigma(&self, t: usize) -> f64 {
        self(t)
    }
}

/// `σ_t = ς (t+1)^{-p}` with `ς > 0` and `p ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSchedule {
    pub varsigma: f64,
    pub p: f64,
}

impl PowerSchedule {
    pub fn new(varsigma: f64, p: f64) -> Result<Self> {
        if !(varsigma > 0.0 && varsigma.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "varsigma = {varsigma} must be positive"
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "p = {p} must lie in (0, 1)"
            )));
        }
        Ok(PowerSchedule { varsigma, p })
    }

    pub fn sigma_at(&self, t: usize) -> f64 {
        self.varsigma * ((t + 1) as f64).powf(-self.p)
    }
}

impl RegularizationSequence for PowerSchedule {
    fn sigma(&self, t: usize) -> f64 {
        self.sigma_at(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleReport {
    pub condition1_ok: bool,
    /// Smallest `t₀` with `(t+2)σ_{t+1} > (t+1)σ_t` for every `t₀ ≤ t ≤ horizon`.
    pub condition2_first_index: Option<usize>,
    /// `t(σ_t/σ_{t+1} − 1)` evaluated at `t = horizon`.
    pub condition3_l_estimate: f64,
    pub horizon: usize,
}

/// Samples the three schedule conditions up to `horizon`. This is a sanity
/// check over a finite window, not a proof about limits.
pub fn verify_conditions(
    seq: &dyn RegularizationSequence,
    horizon: usize,
) -> Result<ScheduleReport> {
    if horizon < 10 {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be at least 10"
        )));
    }
    let sigmas: Vec<f64> = (0..=horizon + 1).map(|t| seq.sigma(t)).collect();
    for (t, w) in sigmas.windows(2).enumerate() {
        if !(w[0] > 0.0 && w[0].is_finite()) || !(w[1] < w[0]) {
            return Err(Error::InvalidSchedule(format!(
                "not strictly decreasing and positive at t = {t} ({} -> {})",
                w[0], w[1]
            )));
        }
    }
    let mut first = Some(0);
    for t in (0..=horizon).rev() {
        let lhs = (t as f64 + 2.0) * sigmas[t + 1];
        let rhs = (t as f64 + 1.0) * sigmas[t];
        if !(lhs > rhs) {
            first = if t == horizon { None } else { Some(t + 1) };
            break;
        }
    }
    let h = horizon as f64;
    let l_estimate = h * (sigmas[horizon] / sigmas[horizon + 1] - 1.0);
    Ok(ScheduleReport {
        condition1_ok: true,
        condition2_first_index: first,
        condition3_l_estimate: l_estimate,
        horizon,
    })
}

/// Default tolerance of the exact line search in the step parameter.
pub const LINE_SEARCH_TOL: f64 = 1e-8;
/// Iteration cap of the exact line search.
pub const LINE_SEARCH_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    OpenLoop,
    ClosedLoop,
    LineSearch { tol: f64 },
}

impl StepRule {
    pub fn line_search() -> Self {
        StepRule::LineSearch {
            tol: LINE_SEARCH_TOL,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            StepRule::OpenLoop => "open",
            StepRule::ClosedLoop => "closed",
            StepRule::LineSearch { .. } => "linesearch",
        }
    }
}

/// `2/(t+2)`.
pub fn step_open_loop(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// Minimizer over `[0, 1]` of `α·d + (L/2)·α²·s`.
pub fn step_closed_loop(d: f64, s: f64, l_smooth: f64) -> Result<f64> {
    if !d.is_finite() || !s.is_finite() || s < 0.0 {
        return Err(Error::NonFiniteValue("closed-loop step inputs".into()));
    }
    if !(l_smooth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothness constant {l_smooth}"
        )));
    }
    if d > 1e-12 * (1.0 + d.abs()) {
        return Err(Error::InvalidDescent { d });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok((-d / (l_smooth * s)).clamp(0.0, 1.0))
}

/// Bounded Brent minimization of `phi` over `[0, 1]`.
pub fn step_line_search<F: FnMut(f64) -> f64>(phi: F, tol: f64) -> Result<f64> {
    Ok(brent_min(phi, 0.0, 1.0, tol, LINE_SEARCH_CAP)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        let s = PowerSchedule::new(0.05, 0.5).unwrap();
        assert_eq!(s.sigma_at(0), 0.05);
        assert!((s.sigma_at(3) - 0.025).abs() < 1e-17);
        let s = PowerSchedule::new(1.0, 0.25).unwrap();
        assert!((s.sigma_at(15) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn open_loop_values() {
        assert_eq!(step_open_loop(0), 1.0);
        assert_eq!(step_open_loop(2), 0.5);
        assert!((step_open_loop(98) - 0.02).abs() < 1e-16);
    }

    #[test]
    fn closed_loop_values() {
        assert_eq!(step_closed_loop(-1.0, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(step_closed_loop(-10.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(step_closed_loop(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            step_closed_loop(1e-3, 1.0, 1.0),
            Err(Error::InvalidDescent { .. })
        ));
    }

    #[test]
    fn line_search_values() {
        let tol = 1e-8;
        assert!((step_line_search(|a| (a - 0.3) * (a - 0.3), tol).unwrap() - 0.3).abs() <= tol);
        assert!(step_line_search(|a| a, tol).unwrap().abs() <= tol);
        let root = 0.25_f64.powf(1.0 / 3.0);
        assert!((step_line_search(|a| a.powi(4) - a, tol).unwrap() - root).abs() <= tol);
    }

    #[test]
    fn constant_schedule_rejected() {
        assert!(matches!(
            verify_conditions(&|_t: usize| 1.0, 100),
            Err(Error::InvalidSchedule(_))
        ));
    }
}
