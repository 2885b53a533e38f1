//! Reference solvers sharing the trace format: iteratively regularized
//! projected gradient, conditional gradient with an inner-value cut, and a
//! simplified bilevel sequential gradient method.

use crate::driver::Drive;
use crate::error::{Error, Result};
use crate::ircg::header_for;
use crate::oracles::SnbOptions;
use crate::point::Point;
use crate::problem::{eval_phi, grad_phi, BilevelProblem};
use crate::schedule::{
    step_closed_loop, step_line_search, step_open_loop, PowerSchedule, StepRule,
};
use crate::trace::{Observer, RunTrace, Termination, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IrPgStep {
    /// Backtracking `α = ᾱ·θ^m` with the smallest `m` satisfying the
    /// sufficient-decrease test with parameter `eta`.
    Armijo {
        theta: f64,
        alpha0: f64,
        eta: f64,
        max_backtracks: usize,
    },
    /// `α_t = alpha0·(t+1)^{-eta}`.
    Power {
        alpha0: f64,
        eta: f64,
    },
    Constant(f64),
}

impl Default for IrPgStep {
    fn default() -> Self {
        IrPgStep::Armijo {
            theta: 0.5,
            alpha0: 0.5,
            eta: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IrPgParams {
    pub schedule: PowerSchedule,
    pub step: IrPgStep,
}

#[derive(Clone, Debug)]
pub struct CgBioParams {
    pub eps_g: f64,
    pub step_rule: StepRule,
    pub oracle: SnbOptions,
    /// Iteration cap of the warm start.
    pub warm_max_iters: usize,
}

impl Default for CgBioParams {
    fn default() -> Self {
        CgBioParams {
            eps_g: 1e-4,
            step_rule: StepRule::OpenLoop,
            oracle: SnbOptions::default(),
            warm_max_iters: 10_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiSgParams {
    /// Exponent of the outer step, in `(1/2, 1)`.
    pub alpha: f64,
    pub c: f64,
}

impl Default for BiSgParams {
    fn default() -> Self {
        BiSgParams {
            alpha: 1.0 / (2.0 - 0.01),
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum BaselineParams {
    IrPg(IrPgParams),
    CgBio(CgBioParams),
    BiSg(BiSgParams),
}

impl BaselineParams {
    pub fn solver_id(&self) -> &'static str {
        match self {
            BaselineParams::IrPg(_) => "irpg",
            BaselineParams::CgBio(_) => "cgbio",
            BaselineParams::BiSg(_) => "bisg-simplified",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaselineParams::IrPg(p) => {
                PowerSchedule::new(p.schedule.varsigma, p.schedule.p)?;
                match p.step {
                    IrPgStep::Armijo {
                        theta, alpha0, eta, ..
                    } => {
                        if !(theta > 0.0 && theta < 1.0 && alpha0 > 0.0 && eta > 0.0 && eta < 1.0) {
                            return Err(Error::InvalidArgument(
                                "Armijo parameters out of range".into(),
                            ));
                        }
                    }
                    IrPgStep::Power { alpha0, eta } => {
                        if !(alpha0 > 0.0 && eta >= 0.0) {
                            return Err(Error::InvalidArgument(
                                "power step parameters out of range".into(),
                            ));
                        }
                    }
                    IrPgStep::Constant(a) => {
                        if !(a > 0.0) {
                            return Err(Error::InvalidArgument(format!("step {a}")));
                        }
                    }
                }
            }
            BaselineParams::CgBio(p) => {
                if !(p.eps_g > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "eps_g = {} must be positive",
                        p.eps_g
                    )));
                }
            }
            BaselineParams::BiSg(p) => {
                if !(p.alpha > 0.5 && p.alpha < 1.0) || !(p.c > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "alpha = {}, c = {}",
                        p.alpha, p.c
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BaselineState {
    pub t: usize,
    pub x: Point,
    pub last_alpha: Option<f64>,
    pub last_sigma: Option<f64>,
    /// Inner value at the warm start; used by the cut of the sliced oracle.
    pub g_warm: Option<f64>,
}

impl BaselineState {
    pub fn new(x0: Point) -> Self {
        BaselineState {
            t: 0,
            x: x0,
            last_alpha: None,
            last_sigma: None,
            g_warm: None,
        }
    }

    fn advance(&mut self, x: Point, alpha: f64, sigma: Option<f64>) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFiniteValue("iterate".into()));
        }
        self.x = x;
        self.t += 1;
        self.last_alpha = Some(alpha);
        self.last_sigma = sigma;
        Ok(())
    }
}

/// Relative slack in the sufficient-decrease test, so that steps whose
/// predicted decrease is below the rounding error of `Φ` are accepted.
const ARMIJO_ROUNDING: f64 = 16.0 * f64::EPSILON;

/// `x ← Proj(x − α(σ∇f(x) + ∇g(x)))`.
pub fn irpg_step(
    state: &mut BaselineState,
    problem: &dyn BilevelProblem,
    params: &IrPgParams,
) -> Result<()> {
    if !problem.has_projection() {
        return Err(Error::MissingProjection);
    }
    let sigma = params.schedule.sigma_at(state.t);
    let grad = grad_phi(problem, sigma, &state.x)?;
    let trial = |alpha: f64| problem.project(&(&state.x - &grad.scaled(alpha)));
    let (alpha, next) = match params.step {
        IrPgStep::Constant(a) => (a, trial(a)?),
        IrPgStep::Power { alpha0, eta } => {
            let a = alpha0 * (state.t as f64 + 1.0).powf(-eta);
            (a, trial(a)?)
        }
        IrPgStep::Armijo {
            theta,
            alpha0,
            eta,
            max_backtracks,
        } => {
            let phi0 = eval_phi(problem, sigma, &state.x)?;
            let rounding = ARMIJO_ROUNDING * phi0.abs().max(1.0);
            let mut a = alpha0;
            let mut accepted = None;
            for _ in 0..=max_backtracks {
                let y = trial(a)?;
                let decrease = grad.dot(&(&y - &state.x));
                if eval_phi(problem, sigma, &y)? <= phi0 + eta * decrease + rounding {
                    accepted = Some(y);
                    break;
                }
                a *= theta;
            }
            match accepted {
                Some(y) => (a, y),
                None => {
                    return Err(Error::NonConvergence {
                        what: "Armijo backtracking".into(),
                        iterations: max_backtracks,
                    })
                }
            }
        }
    };
    state.advance(next, alpha, Some(sigma))
}

/// Conditional gradient step on `f` over the domain cut by the
/// linearization `∇g(x_t)ᵀ(v − x_t) ≤ g(x₀') − g(x_t)`.
pub fn cgbio_step(
    state: &mut BaselineState,
    problem: &dyn BilevelProblem,
    params: &CgBioParams,
) -> Result<()> {
    let g_warm = state.g_warm.ok_or_else(|| {
        Error::InvalidArgument("sliced conditional gradient needs a warm start".into())
    })?;
    let x = &state.x;
    let c = problem.grad_f(x);
    let a = problem.grad_g(x);
    let b = a.dot(x) + g_warm - problem.g(x);
    let v = problem.sliced_lmo(&c, &a, b, &params.oracle)?.v;
    let v = Point::with_layout(v, problem.layout())?;
    let dir = &v - x;
    let alpha = match params.step_rule {
        StepRule::OpenLoop => step_open_loop(state.t),
        StepRule::ClosedLoop => {
            step_closed_loop(c.dot(&dir), dir.norm_squared(), problem.constants().lf)?
        }
        StepRule::LineSearch { tol } => step_line_search(|s| problem.f(&x.toward(&v, s)), tol)?,
    };
    let mut next = x.clone();
    next.axpy(alpha, &dir);
    state.advance(next, alpha, None)
}

/// `y = Proj(x − min(c, 1/L_g)∇g(x))`, then `x ← Proj(y − c(t+1)^{-α}∇f(y))`.
pub fn bisg_step(
    state: &mut BaselineState,
    problem: &dyn BilevelProblem,
    params: &BiSgParams,
) -> Result<()> {
    if !problem.has_projection() {
        return Err(Error::MissingProjection);
    }
    let inner = params.c.min(1.0 / problem.constants().lg);
    let y = problem.project(&(&state.x - &problem.grad_g(&state.x).scaled(inner)))?;
    let outer = params.c * (state.t as f64 + 1.0).powf(-params.alpha);
    let next = problem.project(&(&y - &problem.grad_f(&y).scaled(outer)))?;
    state.advance(next, outer, None)
}

/// Single-level conditional gradient on `g` with open-loop steps until the
/// surrogate gap is at most `tol`.
pub fn inner_warm_start(problem: &dyn BilevelProblem, tol: f64, max_iters: usize) -> Result<Point> {
    let mut x = problem.initial_point();
    for t in 0..=max_iters {
        let grad = problem.grad_g(&x);
        let v = problem.lmo(&grad)?;
        let dir = &v - &x;
        let gap = -grad.dot(&dir);
        if !gap.is_finite() {
            return Err(Error::NonFiniteValue("warm-start gap".into()));
        }
        if gap <= tol {
            return Ok(x);
        }
        if t == max_iters {
            break;
        }
        x.axpy(step_open_loop(t), &dir);
    }
    Err(Error::NonConvergence {
        what: "inner warm start".into(),
        iterations: max_iters,
    })
}

#[derive(Clone, Debug)]
pub struct BaselineConfig {
    pub params: BaselineParams,
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
    pub record_every: usize,
}

fn baseline_row(problem: &dyn BilevelProblem, state: &BaselineState, elapsed: f64) -> TraceRow {
    TraceRow {
        t: state.t,
        elapsed_s: elapsed,
        f_x: problem.f(&state.x),
        g_x: problem.g(&state.x),
        f_z: None,
        g_z: None,
        sigma_t: state.last_sigma,
        alpha_t: state.last_alpha,
        s_t: None,
    }
}

/// Runs a baseline. The sliced conditional gradient method first computes its
/// warm start; that time is not part of the trace.
pub fn solve_baseline(
    problem: &dyn BilevelProblem,
    config: &BaselineConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<RunTrace> {
    config.params.validate()?;
    if config.record_every == 0 {
        return Err(Error::InvalidArgument(
            "record_every must be at least 1".into(),
        ));
    }
    if matches!(
        config.params,
        BaselineParams::IrPg(_) | BaselineParams::BiSg(_)
    ) && !problem.has_projection()
    {
        return Err(Error::MissingProjection);
    }
    let mut header = header_for(problem, config.params.solver_id().to_string());
    let mut state = BaselineState::new(problem.initial_point());
    if let BaselineParams::CgBio(p) = &config.params {
        let warm = match inner_warm_start(problem, p.eps_g / 2.0, p.warm_max_iters) {
            Ok(w) => w,
            Err(e) => {
                let mut trace = RunTrace::new(header);
                trace.header.termination = Termination::Failed(format!("warm start: {e}"));
                trace.rows.push(baseline_row(problem, &state, 0.0));
                return Ok(trace);
            }
        };
        let g_warm = problem.g(&warm);
        header
            .config
            .push(("warm_start.g".into(), format!("{g_warm:.16e}")));
        state = BaselineState::new(warm);
        state.g_warm = Some(g_warm);
    }
    let drive = Drive {
        max_iters: config.max_iters,
        time_limit_s: config.time_limit_s,
        record_every: config.record_every,
        observers,
    };
    let params = config.params.clone();
    Ok(drive.run(
        header,
        state,
        |s| match &params {
            BaselineParams::IrPg(p) => irpg_step(s, problem, p),
            BaselineParams::CgBio(p) => cgbio_step(s, problem, p),
            BaselineParams::BiSg(p) => bisg_step(s, problem, p),
        },
        |s, _, elapsed| baseline_row(problem, s, elapsed),
    ))
}
