//! Instance construction and solver execution.

use std::path::{Path, PathBuf};

use bilevel_core::baselines::{solve_baseline, BaselineConfig, BaselineParams, IrPgParams};
use bilevel_core::ircg::{
    refine_g_opt_projected, run_g_opt_estimator, solve, GOptOptions, SolverConfig,
};
use bilevel_core::problems::{
    gen_synthetic_completion, load_ratings, BallQuadraticProblem, LeastNormProblem,
    MatrixCompletionProblem,
};
use bilevel_core::trace::{RunTrace, Termination};
use bilevel_core::{BilevelProblem, Provenance};
use nalgebra::{DMatrix, DVector};

use crate::config::{Config, GOptSource, InstanceSpec, SolverKind};
use crate::error::{HarnessError, Result};
use crate::trace_io::write_trace_in;

pub fn build_instance(spec: &InstanceSpec) -> Result<Box<dyn BilevelProblem>> {
    Ok(match spec {
        InstanceSpec::LeastNorm { m, n, seed, radius } => {
            let base = LeastNormProblem::random_consistent(*m, *n, *seed)?;
            match radius {
                Some(r) => {
                    let b = base.matrix() * base.solution();
                    Box::new(LeastNormProblem::new(base.matrix().clone(), b, *r)?)
                }
                None => Box::new(base),
            }
        }
        InstanceSpec::BallQuadratic {
            aq_diag,
            bq,
            center,
            kappa,
        } => {
            let n = aq_diag.len();
            if bq.len() != n || center.len() != n {
                return Err(HarnessError::BadValue {
                    key: "instance.bq / instance.center".into(),
                    message: format!("expected {n} entries"),
                });
            }
            let prob = BallQuadraticProblem::new(
                DMatrix::from_diagonal(&DVector::from_column_slice(aq_diag)),
                DVector::from_column_slice(bq),
                DVector::from_column_slice(center),
            )?;
            Box::new(match kappa {
                Some(k) => prob.with_kappa(*k, Provenance::Supplied("config".into())),
                None => prob,
            })
        }
        InstanceSpec::SyntheticCompletion {
            rows,
            cols,
            rank,
            density,
            noise,
            seed,
            delta,
        } => {
            let obs = gen_synthetic_completion(*rows, *cols, *rank, *density, *noise, *seed)?;
            Box::new(MatrixCompletionProblem::new(obs, *delta)?)
        }
        InstanceSpec::Ratings {
            path,
            rows,
            cols,
            delta,
        } => {
            let obs = load_ratings(path, Some((*rows, *cols)))?;
            Box::new(MatrixCompletionProblem::new(obs, *delta)?)
        }
    })
}

/// Inner optimal value and its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub g_opt: f64,
    pub source: String,
}

/// Conditional gradient estimate of `g_opt`, refined by accelerated
/// projected gradient when the conditional gradient phase stalls.
pub fn estimate_reference(problem: &dyn BilevelProblem, max_iters: usize) -> Result<Reference> {
    let opts = GOptOptions {
        max_iters,
        ..GOptOptions::default()
    };
    let est = run_g_opt_estimator(problem, &opts)?;
    if est.converged {
        return Ok(Reference {
            g_opt: est.value,
            source: format!("estimate:cg(gap={:.1e})", est.gap),
        });
    }
    if !problem.has_projection() {
        return Err(bilevel_core::Error::NonConvergence {
            what: "inner optimal value estimate".into(),
            iterations: est.iterations,
        }
        .into());
    }
    let refined = refine_g_opt_projected(
        problem,
        &est.point,
        opts.tol_fine,
        100 * max_iters.max(1000),
    )?;
    if !refined.converged {
        return Err(bilevel_core::Error::NonConvergence {
            what: "projected refinement of the inner optimal value".into(),
            iterations: refined.iterations,
        }
        .into());
    }
    Ok(Reference {
        g_opt: refined.value,
        source: format!(
            "estimate:cg+projected(bound={:.1e})",
            refined.value - refined.lower_bound
        ),
    })
}

pub fn resolve_reference(
    problem: &dyn BilevelProblem,
    source: GOptSource,
    max_iters: usize,
) -> Result<Option<Reference>> {
    let analytic = problem.metadata().g_opt.as_ref().map(|k| Reference {
        g_opt: k.value,
        source: match &k.provenance {
            Provenance::Analytic => "instance:analytic".to_string(),
            other => format!("instance:{other:?}"),
        },
    });
    Ok(match source {
        GOptSource::None => None,
        GOptSource::Value(v) => Some(Reference {
            g_opt: v,
            source: "config".into(),
        }),
        GOptSource::Estimate => Some(estimate_reference(problem, max_iters)?),
        GOptSource::Auto => match analytic {
            Some(r) => Some(r),
            None => Some(estimate_reference(problem, max_iters)?),
        },
    })
}

/// Runs one solver on `problem` with the run settings of `config`.
pub fn run_solver(
    problem: &dyn BilevelProblem,
    kind: SolverKind,
    config: &Config,
) -> Result<RunTrace> {
    let run = &config.run;
    let trace = match kind {
        SolverKind::Ircg(rule) => {
            let cfg = SolverConfig {
                max_iters: run.max_iters,
                time_limit_s: run.time_limit_s,
                record_every: run.record_every,
                ..SolverConfig::new(config.schedule, rule)
            };
            solve(problem, &cfg, &mut [])?
        }
        other => {
            let params = match other {
                SolverKind::IrPg => BaselineParams::IrPg(IrPgParams {
                    schedule: config.schedule,
                    step: config.irpg_step,
                }),
                SolverKind::CgBio => BaselineParams::CgBio(config.cgbio.clone()),
                SolverKind::BiSg => BaselineParams::BiSg(config.bisg),
                SolverKind::Ircg(_) => unreachable!("handled above"),
            };
            let cfg = BaselineConfig {
                params,
                max_iters: run.max_iters,
                time_limit_s: run.time_limit_s,
                record_every: run.record_every,
            };
            solve_baseline(problem, &cfg, &mut [])?
        }
    };
    Ok(trace)
}

/// Outcome of a configured run: trace paths and whether any solver failed.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub traces: Vec<RunTrace>,
    pub paths: Vec<PathBuf>,
    pub any_failed: bool,
}

/// Builds the instance, resolves reference values and runs every configured
/// solver, writing one trace per solver into `out_dir`. With `run.jobs > 1`
/// solvers run on separate threads.
pub fn run_config(config: &Config, out_dir: impl AsRef<Path>) -> Result<RunOutcome> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let problem = build_instance(&config.instance)?;
    let reference = resolve_reference(
        problem.as_ref(),
        config.run.g_opt,
        config.run.g_opt_max_iters,
    )?;
    let instance_name = config.instance_name();

    let run_one = |kind: SolverKind| -> Result<RunTrace> {
        let mut trace = run_solver(problem.as_ref(), kind, config)?;
        let h = &mut trace.header;
        h.instance = instance_name.clone();
        h.seed = config.instance.seed();
        if let Some(r) = &reference {
            h.g_opt = Some(r.g_opt);
            h.g_opt_source = Some(r.source.clone());
        }
        let mut echo = config.entries.clone();
        echo.append(&mut h.config);
        h.config = echo;
        Ok(trace)
    };

    let results: Vec<Result<RunTrace>> = if config.run.jobs > 1 && config.solvers.len() > 1 {
        let mut results = Vec::new();
        for chunk in config.solvers.chunks(config.run.jobs) {
            let chunk_results: Vec<Result<RunTrace>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&k| scope.spawn(move || run_one(k)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("solver thread panicked"))
                    .collect()
            });
            results.extend(chunk_results);
        }
        results
    } else {
        config.solvers.iter().map(|&k| run_one(k)).collect()
    };

    let mut outcome = RunOutcome {
        traces: Vec::new(),
        paths: Vec::new(),
        any_failed: false,
    };
    for trace in results {
        let trace = trace?;
        outcome.any_failed |= matches!(trace.header.termination, Termination::Failed(_));
        outcome.paths.push(write_trace_in(&trace, out_dir)?);
        outcome.traces.push(trace);
    }
    Ok(outcome)
}
