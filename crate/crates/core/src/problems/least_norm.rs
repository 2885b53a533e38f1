use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{dense_svd, spectral_norm};
use crate::point::{Layout, Point};
use crate::problem::{BilevelProblem, Constants, Domain, InstanceMetadata, Known};

/// Least-norm least squares: `f = ½‖x‖²`, `g = ½‖Ax − b‖²` over a Euclidean ball.
#[derive(Clone, Debug)]
pub struct LeastNormProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    radius: f64,
    lg: f64,
    solution: DVector<f64>,
    metadata: InstanceMetadata,
}

pub(crate) fn pseudo_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = dense_svd(a)?;
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let eps = 1e-12 * smax.max(f64::MIN_POSITIVE) * a.nrows().max(a.ncols()) as f64;
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > eps {
            out += svd.v_t.row(i).transpose() * svd.u.column(i).transpose() / s;
        }
    }
    Ok(out)
}

impl LeastNormProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, radius: f64) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "A has {} rows but b has {}",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("least-norm data".into()));
        }
        let solution = pseudo_inverse(&a)? * &b;
        let min_norm = solution.norm();
        if !(radius > min_norm) {
            return Err(Error::RadiusTooSmall { radius, min_norm });
        }
        let residual = &b - &a * &solution;
        let sigma = spectral_norm(&a)?;
        let metadata = InstanceMetadata {
            f_opt: Some(Known::analytic(0.5 * min_norm * min_norm)),
            g_opt: Some(Known::analytic(0.5 * residual.norm_squared())),
            min_f_over_x: Some(Known::analytic(0.0)),
            alpha_f: Some(Known::analytic(1.0)),
            alpha_x: Some(Known::analytic(1.0 / radius)),
            ..InstanceMetadata::default()
        };
        Ok(LeastNormProblem {
            a,
            b,
            radius,
            lg: (sigma * sigma).max(f64::MIN_POSITIVE),
            solution,
            metadata,
        })
    }

    /// Radius twice the norm of the least-norm solution (one if that is zero).
    pub fn with_default_radius(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let norm = (pseudo_inverse(&a)? * &b).norm();
        let radius = if norm > 0.0 { 2.0 * norm } else { 1.0 };
        Self::new(a, b, radius)
    }

    /// Gaussian `A` (`m x n`) and `b = A·x` for a Gaussian `x`.
    pub fn random_consistent(m: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
        let x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let b = &a * x;
        Self::with_default_radius(a, b)
    }

    /// `A†b`.
    pub fn solution(&self) -> &DVector<f64> {
        &self.solution
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn residual(&self, x: &Point) -> DVector<f64> {
        &self.a * x.to_dvector() - &self.b
    }
}

impl BilevelProblem for LeastNormProblem {
    fn name(&self) -> &str {
        "least_norm"
    }
    fn layout(&self) -> Layout {
        Layout::Vector(self.a.ncols())
    }
    fn domain(&self) -> Domain {
        Domain::EuclideanBall {
            radius: self.radius,
        }
    }
    fn f(&self, x: &Point) -> f64 {
        0.5 * x.norm_squared()
    }
    fn grad_f(&self, x: &Point) -> Point {
        x.clone()
    }
    fn g(&self, x: &Point) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }
    fn grad_g(&self, x: &Point) -> Point {
        Point::from_dvector(self.a.tr_mul(&self.residual(x)))
    }
    fn constants(&self) -> Constants {
        Constants {
            lf: 1.0,
            lg: self.lg,
            diameter: 2.0 * self.radius,
        }
    }
    fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }
    fn initial_point(&self) -> Point {
        Point::zeros(self.layout())
    }
}
