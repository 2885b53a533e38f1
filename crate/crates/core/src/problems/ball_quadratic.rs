use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::{Layout, Point};
use crate::problem::{BilevelProblem, Constants, Domain, InstanceMetadata, Known, Provenance};
use crate::problems::least_norm::pseudo_inverse;

/// `g(x) = xᵀAx − 2bᵀx` and `f(x) = ½‖x − c‖²` over the unit Euclidean ball,
/// with `A` positive semidefinite and `b` in the column space of `A`.
#[derive(Clone, Debug)]
pub struct BallQuadraticProblem {
    aq: DMatrix<f64>,
    bq: DVector<f64>,
    center: DVector<f64>,
    /// `A†b`, the minimum-norm unconstrained inner minimizer.
    base: DVector<f64>,
    /// Projector onto the null space of `A`.
    null_proj: DMatrix<f64>,
    radius_null: f64,
    lg: f64,
    metadata: InstanceMetadata,
}

const PSD_TOL: f64 = 1e-10;

impl BallQuadraticProblem {
    pub fn new(aq: DMatrix<f64>, bq: DVector<f64>, center: DVector<f64>) -> Result<Self> {
        let n = aq.nrows();
        if aq.ncols() != n || bq.len() != n || center.len() != n {
            return Err(Error::InvalidArgument(
                "ball quadratic dimensions disagree".into(),
            ));
        }
        if aq
            .iter()
            .chain(bq.iter())
            .chain(center.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteValue("ball quadratic data".into()));
        }
        let scale = aq.amax().max(1.0);
        if (&aq - aq.transpose()).amax() > PSD_TOL * scale {
            return Err(Error::PreconditionViolated("A is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(aq.clone());
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if lambda_min < -PSD_TOL * scale {
            return Err(Error::PreconditionViolated(format!(
                "A is not positive semidefinite (λ_min = {lambda_min})"
            )));
        }
        let pinv = pseudo_inverse(&aq)?;
        let base = &pinv * &bq;
        if (&aq * &base - &bq).norm() > PSD_TOL * (1.0 + bq.norm()) * scale {
            return Err(Error::PreconditionViolated(
                "b is not in the column space of A".into(),
            ));
        }
        let base_norm = base.norm();
        let singular = lambda_min <= PSD_TOL * scale;
        if singular && !(base_norm < 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "singular A requires ‖A†b‖ < 1, found {base_norm}"
            )));
        }
        if !singular && !(base_norm <= 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "nonsingular A requires ‖A†b‖ ≤ 1, found {base_norm}"
            )));
        }
        let null_proj = DMatrix::identity(n, n) - &pinv * &aq;
        let radius_null = (1.0 - base_norm * base_norm).max(0.0).sqrt();

        let c_null = &null_proj * &center;
        let c_row = &center - &c_null;
        let row_part = (&base - &c_row).norm_squared();
        let c_null_norm = c_null.norm();
        let shrink = if c_null_norm > radius_null {
            radius_null / c_null_norm
        } else {
            1.0
        };
        let n_star = &c_null * shrink;
        let null_part = (&n_star - &c_null).norm_squared();
        let f_opt = 0.5 * (row_part + null_part);
        let g_opt = -bq.dot(&base);
        let min_f = 0.5 * (center.norm() - 1.0).max(0.0).powi(2);
        let g_f = (row_part + (radius_null + c_null_norm).powi(2)).sqrt();

        let metadata = InstanceMetadata {
            f_opt: Some(Known::analytic(f_opt)),
            g_opt: Some(Known::analytic(g_opt)),
            min_f_over_x: Some(Known::analytic(min_f)),
            g_f: Some(Known::analytic(g_f)),
            alpha_f: Some(Known::analytic(1.0)),
            alpha_x: Some(Known::analytic(1.0)),
            kappa: None,
        };
        Ok(BallQuadraticProblem {
            aq,
            bq,
            center,
            base,
            null_proj,
            radius_null,
            lg: 2.0 * lambda_max.max(f64::MIN_POSITIVE),
            metadata,
        })
    }

    pub fn with_kappa(mut self, kappa: f64, provenance: Provenance) -> Self {
        self.metadata.kappa = Some(Known {
            value: kappa,
            provenance,
        });
        self
    }

    /// Nearest point of the inner solution set.
    pub fn project_solution_set(&self, x: &DVector<f64>) -> DVector<f64> {
        let x_null = &self.null_proj * x;
        let norm = x_null.norm();
        let clipped = if norm > self.radius_null {
            x_null * (self.radius_null / norm)
        } else {
            x_null
        };
        &self.base + clipped
    }

    /// The bilevel solution.
    pub fn solution(&self) -> DVector<f64> {
        self.project_solution_set(&self.center)
    }

    /// Smallest ratio `(g(x) − g_opt)/dist(x, X_opt)²` over random points of
    /// the ball. This samples the growth modulus; it is not a certified bound.
    pub fn estimate_kappa(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = self.domain();
        let g_opt = self.metadata.g_opt.as_ref().map(|k| k.value).unwrap_or(0.0);
        let mut best = f64::INFINITY;
        for _ in 0..samples {
            let x = domain.sample_interior(self.layout(), &mut rng);
            let xv = x.to_dvector();
            let dist2 = (&xv - self.project_solution_set(&xv)).norm_squared();
            if dist2 > 1e-12 {
                best = best.min((self.g(&x) - g_opt) / dist2);
            }
        }
        best
    }
}

impl BilevelProblem for BallQuadraticProblem {
    fn name(&self) -> &str {
        "ball_quadratic"
    }
    fn layout(&self) -> Layout {
        Layout::Vector(self.aq.nrows())
    }
    fn domain(&self) -> Domain {
        Domain::EuclideanBall { radius: 1.0 }
    }
    fn f(&self, x: &Point) -> f64 {
        0.5 * (x.to_dvector() - &self.center).norm_squared()
    }
    fn grad_f(&self, x: &Point) -> Point {
        Point::from_dvector(x.to_dvector() - &self.center)
    }
    fn g(&self, x: &Point) -> f64 {
        let xv = x.to_dvector();
        xv.dot(&(&self.aq * &xv)) - 2.0 * self.bq.dot(&xv)
    }
    fn grad_g(&self, x: &Point) -> Point {
        let xv = x.to_dvector();
        Point::from_dvector((&self.aq * &xv - &self.bq) * 2.0)
    }
    fn constants(&self) -> Constants {
        Constants {
            lf: 1.0,
            lg: self.lg,
            diameter: 2.0,
        }
    }
    fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }
    fn initial_point(&self) -> Point {
        Point::zeros(self.layout())
    }
}
