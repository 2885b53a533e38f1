//! The iteratively regularized conditional gradient method.

use crate::driver::Drive;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problem::{eval_phi, grad_phi, BilevelProblem};
use crate::schedule::{
    step_closed_loop, step_line_search, step_open_loop, PowerSchedule, StepRule,
};
use crate::trace::{Observer, RunTrace, TraceHeader, TraceRow};

/// Iterate `x_t`, averaged iterate `z_t` and weight sum `S_t`.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: usize,
    pub x: Point,
    /// Equal to `x_0` until the first step.
    pub z: Point,
    pub s: f64,
    pub last_alpha: Option<f64>,
    pub last_sigma: Option<f64>,
}

impl SolverState {
    pub fn new(x0: Point) -> Self {
        SolverState {
            t: 0,
            z: x0.clone(),
            x: x0,
            s: 0.0,
            last_alpha: None,
            last_sigma: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub schedule: PowerSchedule,
    pub step_rule: StepRule,
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(schedule: PowerSchedule, step_rule: StepRule) -> Self {
        SolverConfig {
            schedule,
            step_rule,
            max_iters: 1000,
            time_limit_s: None,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PowerSchedule::new(self.schedule.varsigma, self.schedule.p)?;
        if self.record_every == 0 {
            return Err(Error::InvalidArgument(
                "record_every must be at least 1".into(),
            ));
        }
        if let StepRule::LineSearch { tol } = self.step_rule {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "line-search tolerance {tol}"
                )));
            }
        }
        if let Some(limit) = self.time_limit_s {
            if !(limit >= 0.0) {
                return Err(Error::InvalidArgument(format!("time limit {limit}")));
            }
        }
        Ok(())
    }

    pub fn solver_id(&self) -> String {
        format!("ircg-{}", self.step_rule.id())
    }
}

/// One iteration: linear minimization of the regularized gradient, a step
/// toward the oracle output, and the recursive update of `S` and `z`.
pub fn ircg_step(
    state: &mut SolverState,
    problem: &dyn BilevelProblem,
    config: &SolverConfig,
) -> Result<()> {
    let t = state.t;
    let sigma = config.schedule.sigma_at(t);
    let grad = grad_phi(problem, sigma, &state.x)?;
    let v = problem.lmo(&grad)?;
    let dir = &v - &state.x;
    let alpha = match config.step_rule {
        StepRule::OpenLoop => step_open_loop(t),
        StepRule::ClosedLoop => {
            let c = problem.constants();
            step_closed_loop(grad.dot(&dir), dir.norm_squared(), sigma * c.lf + c.lg)?
        }
        StepRule::LineSearch { tol } => {
            let x = &state.x;
            step_line_search(
                |a| eval_phi(problem, sigma, &x.toward(&v, a)).unwrap_or(f64::NAN),
                tol,
            )?
        }
    };
    let mut x_next = state.x.clone();
    x_next.axpy(alpha, &dir);

    let tf = t as f64;
    let s_next = state.s + 2.0 * (tf + 1.0) * sigma;
    let mut z_next = state.z.clone();
    let step_weight = (tf + 1.0) * tf * sigma / s_next;
    let pull_weight = 2.0 * (tf + 1.0) * sigma / s_next;
    z_next.axpy(step_weight, &(&x_next - &state.x));
    z_next.axpy(pull_weight, &(&x_next - &state.z));

    if !x_next.is_finite() || !z_next.is_finite() {
        return Err(Error::NonFiniteValue("iterate".into()));
    }
    state.x = x_next;
    state.z = z_next;
    state.s = s_next;
    state.t = t + 1;
    state.last_alpha = Some(alpha);
    state.last_sigma = Some(sigma);
    Ok(())
}

/// Explicit weights of the averaged iterate: `(t+1)t·σ_t` on `x_t` plus
/// `(i+1)i·(σ_{i−1} − σ_i)` on each `x_i`, `1 ≤ i ≤ t`.
pub fn z_weights(schedule: &PowerSchedule, t: usize) -> Vec<f64> {
    let sigma = |i: usize| schedule.sigma_at(i);
    let mut w: Vec<f64> = (1..=t)
        .map(|i| (i as f64 + 1.0) * i as f64 * (sigma(i - 1) - sigma(i)))
        .collect();
    if t >= 1 {
        w[t - 1] += (t as f64 + 1.0) * t as f64 * sigma(t);
    }
    w
}

/// `S_t` from its explicit sum.
pub fn s_closed_form(schedule: &PowerSchedule, t: usize) -> f64 {
    z_weights(schedule, t).iter().sum()
}

/// Averaged iterate from the history `x_1, …, x_t` by its explicit formula.
pub fn z_closed_form(history: &[Point], schedule: &PowerSchedule, t: usize) -> Result<Point> {
    if t == 0 || history.len() < t {
        return Err(Error::InvalidArgument(format!(
            "history of {} points for t = {t}",
            history.len()
        )));
    }
    let w = z_weights(schedule, t);
    let total: f64 = w.iter().sum();
    let mut z = Point::zeros(history[0].layout());
    for (wi, xi) in w.iter().zip(history) {
        z.axpy(wi / total, xi);
    }
    Ok(z)
}

fn ircg_row(
    problem: &dyn BilevelProblem,
    config: &SolverConfig,
    state: &SolverState,
    elapsed: f64,
) -> TraceRow {
    let averaged = state.t >= 1;
    TraceRow {
        t: state.t,
        elapsed_s: elapsed,
        f_x: problem.f(&state.x),
        g_x: problem.g(&state.x),
        f_z: averaged.then(|| problem.f(&state.z)),
        g_z: averaged.then(|| problem.g(&state.z)),
        sigma_t: Some(config.schedule.sigma_at(state.t)),
        alpha_t: state.last_alpha,
        s_t: Some(state.s),
    }
}

pub(crate) fn header_for(problem: &dyn BilevelProblem, solver: String) -> TraceHeader {
    let mut header = TraceHeader::new(solver, problem.name());
    let meta = problem.metadata();
    header.f_opt = meta.f_opt.as_ref().map(|k| k.value);
    header.g_opt = meta.g_opt.as_ref().map(|k| k.value);
    if header.g_opt.is_some() {
        header.g_opt_source = Some("instance".into());
    }
    header
}

/// Runs the method from the problem's initial point. Step failures end the
/// run and are reported in the trace header.
pub fn solve(
    problem: &dyn BilevelProblem,
    config: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<RunTrace> {
    config.validate()?;
    let x0 = problem.initial_point();
    x0.check_layout(problem.layout())?;
    let header = header_for(problem, config.solver_id());
    let drive = Drive {
        max_iters: config.max_iters,
        time_limit_s: config.time_limit_s,
        record_every: config.record_every,
        observers,
    };
    Ok(drive.run(
        header,
        SolverState::new(x0),
        |s| ircg_step(s, problem, config),
        |s, _, elapsed| ircg_row(problem, config, s, elapsed),
    ))
}

#[derive(Clone, Debug)]
pub struct GOptOptions {
    pub tol_coarse: f64,
    pub tol_fine: f64,
    pub max_iters: usize,
    /// Step rule of the refinement phase.
    pub refine: StepRule,
}

impl Default for GOptOptions {
    fn default() -> Self {
        GOptOptions {
            tol_coarse: 1e-5,
            tol_fine: 1e-12,
            max_iters: 2_000_000,
            refine: StepRule::line_search(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GOptEstimate {
    /// Inner objective at the final point.
    pub value: f64,
    /// Surrogate gap at the final point; `value − gap ≤ g_opt ≤ value`.
    pub gap: f64,
    /// Largest certified lower bound seen along the run.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub point: Point,
}

/// Single-level conditional gradient on the inner objective from the
/// problem's initial point, stopped by the surrogate gap.
///
/// The open-loop phase runs to `tol_coarse`; the refinement phase continues
/// from that point with `refine` steps (the open-loop counter is not reset,
/// since a unit first step would discard the warm start).
pub fn run_g_opt_estimator(
    problem: &dyn BilevelProblem,
    opts: &GOptOptions,
) -> Result<GOptEstimate> {
    if !(opts.tol_fine > 0.0 && opts.tol_fine <= opts.tol_coarse) {
        return Err(Error::InvalidArgument(format!(
            "tolerances coarse {} and fine {}",
            opts.tol_coarse, opts.tol_fine
        )));
    }
    let mut x = problem.initial_point();
    let mut lower = f64::NEG_INFINITY;
    let mut t = 0;
    let mut phase_fine = false;
    loop {
        let grad = problem.grad_g(&x);
        let v = problem.lmo(&grad)?;
        let dir = &v - &x;
        let gap = -grad.dot(&dir);
        let value = problem.g(&x);
        if !value.is_finite() || !gap.is_finite() {
            return Err(Error::NonFiniteValue("inner objective estimator".into()));
        }
        lower = lower.max(value - gap.max(0.0));
        if !phase_fine && gap <= opts.tol_coarse {
            phase_fine = true;
        }
        if phase_fine && gap <= opts.tol_fine || t >= opts.max_iters {
            return Ok(GOptEstimate {
                value,
                gap,
                lower_bound: lower,
                iterations: t,
                converged: gap <= opts.tol_fine,
                point: x,
            });
        }
        let rule = if phase_fine {
            opts.refine
        } else {
            StepRule::OpenLoop
        };
        let alpha = match rule {
            StepRule::OpenLoop => step_open_loop(t),
            StepRule::ClosedLoop => {
                step_closed_loop(-gap, dir.norm_squared(), problem.constants().lg)?
            }
            StepRule::LineSearch { tol } => step_line_search(|a| problem.g(&x.toward(&v, a)), tol)?,
        };
        x.axpy(alpha, &dir);
        t += 1;
    }
}

/// Estimate of the inner optimal value with `g_opt ≤ estimate ≤ g_opt + tol_fine`.
pub fn estimate_g_opt(problem: &dyn BilevelProblem, opts: &GOptOptions) -> Result<f64> {
    let est = run_g_opt_estimator(problem, opts)?;
    if !est.converged {
        return Err(Error::NonConvergence {
            what: "inner optimal value estimate".into(),
            iterations: est.iterations,
        });
    }
    Ok(est.value)
}

/// Accelerated projected gradient on the inner objective with adaptive
/// restarts, starting from `start` and certified by the surrogate gap.
///
/// Stops once the best value found is within `tol` of the best certified
/// lower bound. Used when the conditional gradient estimator cannot reach a
/// tight tolerance in reasonable time.
pub fn refine_g_opt_projected(
    problem: &dyn BilevelProblem,
    start: &Point,
    tol: f64,
    max_iters: usize,
) -> Result<GOptEstimate> {
    if !problem.has_projection() {
        return Err(Error::MissingProjection);
    }
    let step = 1.0 / problem.constants().lg;
    let mut x = problem.project(start)?;
    let mut y = x.clone();
    let mut momentum = 1.0_f64;
    let mut best_value = f64::INFINITY;
    let mut best_point = x.clone();
    let mut best_gap = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for k in 0..=max_iters {
        if k % 10 == 0 || k == max_iters {
            let grad = problem.grad_g(&x);
            let v = problem.lmo(&grad)?;
            let gap = grad.dot(&(&x - &v));
            let value = problem.g(&x);
            if !value.is_finite() || !gap.is_finite() {
                return Err(Error::NonFiniteValue("inner objective refinement".into()));
            }
            lower = lower.max(value - gap.max(0.0));
            if value < best_value {
                best_value = value;
                best_point = x.clone();
                best_gap = gap;
            }
            if best_value - lower <= tol || k == max_iters {
                return Ok(GOptEstimate {
                    value: best_value,
                    gap: best_gap,
                    lower_bound: lower,
                    iterations: k,
                    converged: best_value - lower <= tol,
                    point: best_point,
                });
            }
        }
        let x_next = problem.project(&(&y - &problem.grad_g(&y).scaled(step)))?;
        let momentum_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let restart = (&y - &x_next).dot(&(&x_next - &x)) > 0.0;
        if restart {
            momentum = 1.0;
            y = x_next.clone();
        } else {
            y = x_next.toward(
                &(&x_next + &(&x_next - &x)),
                (momentum - 1.0) / momentum_next,
            );
            momentum = momentum_next;
        }
        x = x_next;
    }
    unreachable!("loop returns at k == max_iters")
}
