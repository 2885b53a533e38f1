//! Randomized consistency checks of the linear oracles and projections.

use bilevel_core::numerics::simplex_cap_projection;
use bilevel_core::oracles::{
    lmo_nuclear, nuclear_norm, project_nuclear, snb_lo, trace_inner, OracleMatrixProblem,
    SnbOptions,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
}

fn check(
    name: &'static str,
    tolerance: f64,
    cases: usize,
    mut worst_case: impl FnMut() -> f64,
) -> CheckResult {
    let worst = (0..cases).map(|_| worst_case()).fold(0.0, f64::max);
    CheckResult {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
        cases,
    }
}

pub fn run_selftest(seed: u64, cases: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(check(
        "lmo_nuclear objective vs dense SVD",
        1e-8,
        cases,
        || {
            let c = random_matrix(&mut rng, 6, 5);
            let delta = rng.random_range(0.5..5.0);
            match lmo_nuclear(&c, delta) {
                Ok(v) => {
                    let reference = -delta * c.singular_values().max();
                    (trace_inner(&c, &v) - reference).abs() / reference.abs()
                }
                Err(_) => f64::INFINITY,
            }
        },
    ));

    out.push(check(
        "snb_lo duality gap and feasibility",
        1e-6,
        cases,
        || {
            let c = random_matrix(&mut rng, 6, 5);
            let a = random_matrix(&mut rng, 6, 5);
            let delta = rng.random_range(0.5..3.0);
            let b = -delta * a.singular_values().max() * rng.random_range(-1.0..0.999);
            let prob = OracleMatrixProblem { c, a, b, delta };
            match snb_lo(&prob, &SnbOptions::default()) {
                Ok(s) => {
                    let gap = s.gap() / (1.0 + s.dual_value.abs());
                    let infeas = (trace_inner(&prob.a, &s.v) - b)
                        .max(nuclear_norm(&s.v) - delta)
                        .max(0.0);
                    gap.max(100.0 * infeas)
                }
                Err(_) => f64::INFINITY,
            }
        },
    ));

    out.push(check(
        "project_nuclear variational inequality",
        1e-8,
        cases,
        || {
            let x = random_matrix(&mut rng, 6, 5) * 3.0;
            let delta = rng.random_range(0.5..3.0);
            let Ok(p) = project_nuclear(&x, delta) else {
                return f64::INFINITY;
            };
            (0..10)
                .map(|_| {
                    let d = random_matrix(&mut rng, 6, 5);
                    match lmo_nuclear(&d, delta) {
                        Ok(y) => trace_inner(&(&x - &p), &(&y - &p)).max(0.0),
                        Err(_) => f64::INFINITY,
                    }
                })
                .fold(0.0, f64::max)
        },
    ));

    out.push(check(
        "simplex_cap_projection optimality conditions",
        1e-10,
        cases,
        || {
            let k = rng.random_range(1..=12);
            let x: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..2.0)).collect();
            let delta = rng.random_range(0.1..3.0);
            let y = simplex_cap_projection(&x, delta);
            let total: f64 = y.iter().sum();
            let tau = x
                .iter()
                .zip(&y)
                .find(|(_, yi)| **yi > 0.0)
                .map(|(xi, yi)| xi - yi)
                .unwrap_or(0.0)
                .max(0.0);
            let mut worst = (total - delta)
                .max(0.0)
                .max(-y.iter().cloned().fold(0.0, f64::min));
            for (xi, yi) in x.iter().zip(&y) {
                let kkt = if *yi > 0.0 {
                    (xi - yi - tau).abs()
                } else {
                    (xi - tau).max(0.0)
                };
                worst = worst.max(kkt);
            }
            if tau > 0.0 {
                worst = worst.max((total - delta).abs());
            }
            worst
        },
    ));
    out
}
