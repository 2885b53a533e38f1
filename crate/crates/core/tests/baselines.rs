use bilevel_core::baselines::{
    bisg_step, cgbio_step, inner_warm_start, irpg_step, solve_baseline, BaselineConfig,
    BaselineParams, BaselineState, BiSgParams, CgBioParams, IrPgParams, IrPgStep,
};
use bilevel_core::problems::{
    gen_synthetic_completion, CustomProblem, LeastNormProblem, MatrixCompletionProblem,
};
use bilevel_core::trace::Termination;
use bilevel_core::{BilevelProblem, Domain, Error, Point, PowerSchedule, StepRule};

fn interval(outer_slope: f64) -> CustomProblem {
    CustomProblem::new(
        "interval",
        Domain::EuclideanBall { radius: 1.0 },
        Point::from_slice(&[0.5]),
    )
    .outer(
        move |x| outer_slope * x.as_slice()[0],
        move |_| Point::from_slice(&[outer_slope]),
        1.0,
    )
    .inner(
        |x| x.as_slice()[0].powi(2),
        |x| Point::from_slice(&[2.0 * x.as_slice()[0]]),
        2.0,
    )
}

fn irpg(step: IrPgStep) -> IrPgParams {
    IrPgParams {
        schedule: PowerSchedule::new(1.0, 0.5).unwrap(),
        step,
    }
}

#[test]
fn irpg_constant_steps() {
    let prob = interval(0.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    irpg_step(&mut state, &prob, &irpg(IrPgStep::Constant(0.25))).unwrap();
    assert_eq!(state.x.as_slice(), &[0.25]);

    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    irpg_step(&mut state, &prob, &irpg(IrPgStep::Constant(2.0))).unwrap();
    assert_eq!(state.x.as_slice(), &[-1.0]);

    let mut state = BaselineState::new(Point::from_slice(&[0.0]));
    irpg_step(&mut state, &prob, &irpg(IrPgStep::default())).unwrap();
    assert_eq!(state.x.as_slice(), &[0.0]);
}

#[test]
fn irpg_armijo_decreases_phi() {
    let prob = LeastNormProblem::random_consistent(10, 30, 3).unwrap();
    let params = irpg(IrPgStep::default());
    let mut state = BaselineState::new(Point::from_vec(vec![0.1; 30]));
    for _ in 0..200 {
        let sigma = params.schedule.sigma_at(state.t);
        let before = sigma * prob.f(&state.x) + prob.g(&state.x);
        irpg_step(&mut state, &prob, &params).unwrap();
        let after = sigma * prob.f(&state.x) + prob.g(&state.x);
        assert!(after <= before * (1.0 + 1e-14));
        assert!(prob.contains(&state.x));
    }
}

#[test]
fn irpg_needs_a_projection() {
    let prob = interval(0.0).without_projection();
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    assert!(matches!(
        irpg_step(&mut state, &prob, &irpg(IrPgStep::default())),
        Err(Error::MissingProjection)
    ));
}

#[test]
fn cgbio_cut_on_interval() {
    let prob = interval(1.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    state.g_warm = Some(0.25);
    let params = CgBioParams {
        step_rule: StepRule::OpenLoop,
        ..Default::default()
    };
    cgbio_step(&mut state, &prob, &params).unwrap();
    assert!((state.x.as_slice()[0] + 1.0).abs() < 1e-9);
}

#[test]
fn cgbio_cut_keeps_feasible_direction() {
    let prob = interval(-1.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    state.g_warm = Some(0.25);
    let params = CgBioParams {
        step_rule: StepRule::OpenLoop,
        ..Default::default()
    };
    cgbio_step(&mut state, &prob, &params).unwrap();
    assert!((state.x.as_slice()[0] - 0.5).abs() < 1e-9);
}

#[test]
fn cgbio_without_warm_start_is_rejected() {
    let prob = interval(1.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    assert!(cgbio_step(&mut state, &prob, &CgBioParams::default()).is_err());
}

#[test]
fn bisg_steps() {
    let prob = interval(0.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    bisg_step(
        &mut state,
        &prob,
        &BiSgParams {
            alpha: 0.75,
            c: 0.25,
        },
    )
    .unwrap();
    assert_eq!(state.x.as_slice(), &[0.25]);

    let prob = CustomProblem::new(
        "flat",
        Domain::EuclideanBall { radius: 1.0 },
        Point::from_slice(&[0.0]),
    )
    .outer(|x| x.as_slice()[0], |_| Point::from_slice(&[1.0]), 1.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.0]));
    bisg_step(
        &mut state,
        &prob,
        &BiSgParams {
            alpha: 0.75,
            c: 0.5,
        },
    )
    .unwrap();
    assert_eq!(state.x.as_slice(), &[-0.5]);
    let outer_late = 0.5 * 1001f64.powf(-0.75);
    state.t = 1000;
    state.x = Point::from_slice(&[0.0]);
    bisg_step(
        &mut state,
        &prob,
        &BiSgParams {
            alpha: 0.75,
            c: 0.5,
        },
    )
    .unwrap();
    assert!((state.x.as_slice()[0] + outer_late).abs() < 1e-15);
}

#[test]
fn warm_start_reaches_tolerance() {
    let prob = LeastNormProblem::random_consistent(10, 30, 5).unwrap();
    let x = inner_warm_start(&prob, 1e-2, 1_000_000).unwrap();
    let grad = prob.grad_g(&x);
    let v = prob.lmo(&grad).unwrap();
    assert!(grad.dot(&(&x - &v)) <= 1e-2);
    assert!(matches!(
        inner_warm_start(&prob, 1e-12, 3),
        Err(Error::NonConvergence { .. })
    ));
}

#[test]
fn baselines_on_small_completion() {
    let obs = gen_synthetic_completion(12, 8, 2, 0.5, 0.1, 1).unwrap();
    let prob = MatrixCompletionProblem::new(obs, 5.0).unwrap();
    let sched = PowerSchedule::new(0.05, 0.5).unwrap();
    for params in [
        BaselineParams::IrPg(IrPgParams {
            schedule: sched,
            step: IrPgStep::default(),
        }),
        BaselineParams::CgBio(CgBioParams::default()),
        BaselineParams::BiSg(BiSgParams::default()),
    ] {
        let id = params.solver_id();
        let config = BaselineConfig {
            params,
            max_iters: 200,
            time_limit_s: None,
            record_every: 1,
        };
        let trace = solve_baseline(&prob, &config, &mut []).unwrap();
        assert_eq!(trace.header.termination, Termination::MaxIters, "{id}");
        assert_eq!(trace.rows.len(), 201);
        assert!(trace
            .rows
            .iter()
            .all(|r| r.f_z.is_none() && r.s_t.is_none()));
        trace.validate().unwrap();
        assert_eq!(trace.header.solver, id);
    }
}

#[test]
fn cgbio_records_warm_start_value() {
    let prob = LeastNormProblem::random_consistent(5, 8, 2).unwrap();
    let config = BaselineConfig {
        params: BaselineParams::CgBio(CgBioParams::default()),
        max_iters: 20,
        time_limit_s: None,
        record_every: 5,
    };
    let trace = solve_baseline(&prob, &config, &mut []).unwrap();
    assert!(trace.header.config.iter().any(|(k, _)| k == "warm_start.g"));
    assert!(trace.rows[0].g_x <= 0.5e-4 + 1e-15);
}

#[test]
fn cgbio_warm_start_failure_is_recorded() {
    let prob = LeastNormProblem::random_consistent(5, 8, 2).unwrap();
    let params = CgBioParams {
        eps_g: 1e-12,
        warm_max_iters: 3,
        ..Default::default()
    };
    let config = BaselineConfig {
        params: BaselineParams::CgBio(params),
        max_iters: 20,
        time_limit_s: None,
        record_every: 1,
    };
    let trace = solve_baseline(&prob, &config, &mut []).unwrap();
    assert!(
        matches!(&trace.header.termination, Termination::Failed(m) if m.starts_with("warm start"))
    );
    assert_eq!(trace.rows.len(), 1);
    assert_eq!(trace.rows[0].t, 0);
}

#[test]
fn bisg_inner_step_is_capped_by_smoothness() {
    let prob = interval(0.0);
    let mut state = BaselineState::new(Point::from_slice(&[0.5]));
    bisg_step(
        &mut state,
        &prob,
        &BiSgParams {
            alpha: 0.75,
            c: 1.0,
        },
    )
    .unwrap();
    assert_eq!(state.x.as_slice(), &[0.0]);
}

fn assert_reaches_inner_tolerance(params: BaselineParams) {
    let prob = LeastNormProblem::random_consistent(10, 30, 7).unwrap();
    let g_opt = prob.metadata().g_opt.as_ref().unwrap().value;
    let id = params.solver_id();
    let config = BaselineConfig {
        params,
        max_iters: 100_000,
        time_limit_s: None,
        record_every: 1000,
    };
    let trace = solve_baseline(&prob, &config, &mut []).unwrap();
    assert_eq!(trace.header.termination, Termination::MaxIters, "{id}");
    let best = trace
        .rows
        .iter()
        .map(|r| r.g_x - g_opt)
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-3, "{id}: {best:e}");
}

#[test]
fn irpg_and_cgbio_reach_inner_tolerance_on_least_norm() {
    assert_reaches_inner_tolerance(BaselineParams::IrPg(irpg(IrPgStep::default())));
    assert_reaches_inner_tolerance(BaselineParams::CgBio(CgBioParams {
        eps_g: 1e-2,
        ..Default::default()
    }));
}

#[test]
#[ignore = "fails: with c = 1 the inner gap stalls near 1.4e-2 after 1e5 iterations"]
fn bisg_reaches_inner_tolerance_on_least_norm() {
    assert_reaches_inner_tolerance(BaselineParams::BiSg(BiSgParams::default()));
}

#[test]
fn invalid_parameters() {
    let prob = interval(0.0);
    let bad = [
        BaselineParams::BiSg(BiSgParams { alpha: 0.4, c: 1.0 }),
        BaselineParams::CgBio(CgBioParams {
            eps_g: 0.0,
            ..Default::default()
        }),
        BaselineParams::IrPg(irpg(IrPgStep::Constant(-1.0))),
        BaselineParams::IrPg(irpg(IrPgStep::Armijo {
            theta: 1.5,
            alpha0: 1.0,
            eta: 0.5,
            max_backtracks: 10,
        })),
    ];
    for params in bad {
        let config = BaselineConfig {
            params,
            max_iters: 1,
            time_limit_s: None,
            record_every: 1,
        };
        assert!(solve_baseline(&prob, &config, &mut []).is_err());
    }
}
