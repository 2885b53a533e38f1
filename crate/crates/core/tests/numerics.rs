use bilevel_core::numerics::{
    brent_min, leading_eigenspace, leading_singular_triplet, simplex_cap_projection, spectral_norm,
    Gram, LANCZOS_TOL,
};
use bilevel_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > tol {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Projection onto `{y >= 0, sum(y) <= delta}` by enumerating supports.
fn brute_force_cap(x: &[f64], delta: f64) -> Vec<f64> {
    let k = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let mut candidates = Vec::new();
        let mut y = vec![0.0; k];
        for &i in &support {
            y[i] = x[i];
        }
        candidates.push(y);
        if !support.is_empty() {
            let sum: f64 = support.iter().map(|&i| x[i]).sum();
            let tau = (sum - delta) / support.len() as f64;
            if tau >= 0.0 {
                let mut y = vec![0.0; k];
                for &i in &support {
                    y[i] = x[i] - tau;
                }
                candidates.push(y);
            }
        }
        for y in candidates {
            let feasible = y.iter().all(|&v| v >= -1e-15) && y.iter().sum::<f64>() <= delta + 1e-12;
            if !feasible {
                continue;
            }
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, y));
            }
        }
    }
    best.expect("zero vector is always feasible").1
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn brent_examples() {
    let (x, _) = brent_min(|x| (x - 2.0) * (x - 2.0), 0.0, 5.0, 1e-8, 100).unwrap();
    assert!((x - 2.0).abs() <= 1e-8);
    let (x, fx) = brent_min(|x| x, 0.0, 1.0, 1e-8, 100).unwrap();
    assert!(x.abs() <= 1e-8 && fx.abs() <= 1e-8);
    let (x, _) = brent_min(|x: f64| (1.0 - x).abs(), 0.0, 3.0, 1e-8, 100).unwrap();
    assert!((x - 1.0).abs() <= 1e-8);
}

#[test]
fn brent_matches_golden_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let c: f64 = rng.random_range(-1.0..3.0);
        let s: f64 = rng.random_range(0.5..4.0);
        let f = |x: f64| s * (x - c).powi(2) + (x - c).powi(4) + 0.1 * x;
        let (x, _) = brent_min(f, 0.0, 2.0, 1e-10, 200).unwrap();
        let reference = golden_section(f, 0.0, 2.0, 1e-12);
        assert!(
            (x - reference).abs() <= 1e-7,
            "brent {x} golden {reference}"
        );
    }
}

#[test]
fn brent_rejects_nan() {
    let err = brent_min(|_| f64::NAN, 0.0, 1.0, 1e-8, 100).unwrap_err();
    assert!(matches!(err, Error::NonFiniteValue(_)));
}

#[test]
fn triplet_examples() {
    let t = leading_singular_triplet(
        &DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]),
        LANCZOS_TOL,
    )
    .unwrap();
    assert!((t.sigma - 3.0).abs() < 1e-12);
    assert!((t.u[0].abs() - 1.0).abs() < 1e-12 && (t.v[0].abs() - 1.0).abs() < 1e-12);

    let t = leading_singular_triplet(
        &DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]),
        LANCZOS_TOL,
    )
    .unwrap();
    assert!((t.sigma - 3.0).abs() < 1e-12);
    assert!((t.u[0] - 1.0).abs() < 1e-12);
    assert!((t.v[1] - 1.0).abs() < 1e-12);

    let err = leading_singular_triplet(&DMatrix::zeros(3, 2), LANCZOS_TOL).unwrap_err();
    assert!(matches!(err, Error::ZeroMatrix));
}

#[test]
fn triplet_matches_dense_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..200 {
        let (n, p) = (rng.random_range(1..20), rng.random_range(1..20));
        let c = random_matrix(&mut rng, n, p);
        let t = leading_singular_triplet(&c, LANCZOS_TOL).unwrap();
        let svd = c.clone().svd(false, false);
        let sigma_max = svd.singular_values.max();
        assert!(
            (t.sigma - sigma_max).abs() <= 1e-10 * sigma_max,
            "trial {trial}"
        );
        let residual = (&c * &t.v - &t.u * t.sigma).norm();
        assert!(
            residual <= 1e-7 * sigma_max,
            "trial {trial} residual {residual}"
        );
        assert!((t.u.norm() - 1.0).abs() < 1e-12 && (t.v.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn triplet_on_tall_clustered_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = random_matrix(&mut rng, 80, 80).qr().q();
    let w = random_matrix(&mut rng, 30, 30).qr().q();
    let mut s = DMatrix::zeros(80, 30);
    for i in 0..30 {
        s[(i, i)] = 10.0 - 1e-6 * i as f64;
    }
    let c = q * s * w.transpose();
    let t = leading_singular_triplet(&c, LANCZOS_TOL).unwrap();
    assert!((t.sigma - 10.0).abs() <= 1e-9);
}

#[test]
fn spectral_norm_of_zero_is_zero() {
    assert_eq!(spectral_norm(&DMatrix::zeros(4, 4)).unwrap(), 0.0);
}

#[test]
fn eigenspace_examples() {
    let e = leading_eigenspace(&DMatrix::<f64>::identity(2, 2), 1e-6).unwrap();
    assert!((e.lambda_max - 1.0).abs() < 1e-12);
    assert_eq!(e.dim(), 2);

    let e =
        leading_eigenspace(&DMatrix::from_diagonal(&nalgebra::dvector![4.0, 1.0]), 1e-6).unwrap();
    assert!((e.lambda_max - 4.0).abs() < 1e-12);
    assert_eq!(e.dim(), 1);
    assert!((e.basis[(0, 0)].abs() - 1.0).abs() < 1e-12);

    let m = DMatrix::from_diagonal(&nalgebra::dvector![4.0, 4.0 * (1.0 - 1e-8), 1.0]);
    assert_eq!(leading_eigenspace(&m, 1e-6).unwrap().dim(), 2);
}

#[test]
fn gram_operator_matches_materialized_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = random_matrix(&mut rng, 7, 4);
    let e = leading_eigenspace(&Gram(&p), 1e-10).unwrap();
    let dense = p.transpose() * &p;
    let reference = dense.symmetric_eigen().eigenvalues.max();
    assert!((e.lambda_max - reference).abs() <= 1e-10 * reference);
}

#[test]
fn simplex_cap_examples() {
    assert_eq!(simplex_cap_projection(&[0.5, 0.5], 1.0), vec![0.5, 0.5]);
    let y = simplex_cap_projection(&[2.0, 0.0], 1.0);
    assert!((y[0] - 1.0).abs() < 1e-15 && y[1] == 0.0);
    let y = simplex_cap_projection(&[3.0, 1.0], 2.0);
    assert!((y[0] - 2.0).abs() < 1e-15 && y[1] == 0.0);
}

#[test]
fn simplex_cap_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..500 {
        let k = rng.random_range(1..=12);
        let x: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..2.0)).collect();
        let delta = rng.random_range(0.1..3.0);
        let fast = simplex_cap_projection(&x, delta);
        let slow = brute_force_cap(&x, delta);
        for (a, b) in fast.iter().zip(&slow) {
            assert!(
                (a - b).abs() <= 1e-10,
                "trial {trial}: {fast:?} vs {slow:?}"
            );
        }
    }
}

proptest! {
    #[test]
    fn simplex_cap_is_feasible_and_idempotent(
        x in prop::collection::vec(-5.0f64..5.0, 1..30),
        delta in 0.01f64..10.0,
    ) {
        let y = simplex_cap_projection(&x, delta);
        prop_assert!(y.iter().all(|&v| v >= 0.0));
        prop_assert!(y.iter().sum::<f64>() <= delta * (1.0 + 1e-12));
        let yy = simplex_cap_projection(&y, delta);
        for (a, b) in y.iter().zip(&yy) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn brent_never_worse_than_endpoints(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = |x: f64| (x - a).abs() + 0.3 * (x - b).powi(2);
        let (_, fx) = brent_min(f, -1.0, 1.0, 1e-9, 200).unwrap();
        prop_assert!(fx <= f(-1.0) + 1e-12 && fx <= f(1.0) + 1e-12);
    }
}
