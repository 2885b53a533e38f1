use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_finite, Error, Result};
use crate::oracles::{
    lmo_nuclear, nuclear_norm, project_nuclear, snb_lo, OracleMatrixProblem, SnbOptions,
    SncbSolution,
};
use crate::point::{Layout, Point};

/// Default absolute tolerance of membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Smoothness constants and the diameter of the feasible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub lf: f64,
    pub lg: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Analytic,
    LongRun(String),
    Supplied(String),
    Estimated(String),
}

/// A known value together with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Known {
    pub value: f64,
    pub provenance: Provenance,
}

impl Known {
    pub fn analytic(value: f64) -> Self {
        Known {
            value,
            provenance: Provenance::Analytic,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceMetadata {
    pub f_opt: Option<Known>,
    pub g_opt: Option<Known>,
    pub min_f_over_x: Option<Known>,
    /// Quadratic-growth modulus of the inner objective.
    pub kappa: Option<Known>,
    /// Largest outer gradient norm over the inner solution set.
    pub g_f: Option<Known>,
    pub alpha_f: Option<Known>,
    pub alpha_x: Option<Known>,
}

/// Feasible sets shipped with the toolkit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    EuclideanBall { radius: f64 },
    NuclearBall { delta: f64 },
}

impl Domain {
    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::EuclideanBall { radius } => 2.0 * radius,
            Domain::NuclearBall { delta } => 2.0 * delta,
        }
    }

    fn radius(&self) -> f64 {
        match *self {
            Domain::EuclideanBall { radius } => radius,
            Domain::NuclearBall { delta } => delta,
        }
    }

    /// Norm whose unit ball, scaled, is this domain.
    pub fn gauge(&self, x: &Point) -> f64 {
        match self {
            Domain::EuclideanBall { .. } => x.norm(),
            Domain::NuclearBall { .. } => nuclear_norm(x.as_matrix()),
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        x.is_finite() && self.gauge(x) <= self.radius() + tol
    }

    /// Minimizer of `⟨d, v⟩` over the domain; the zero direction maps to the center.
    pub fn lmo(&self, d: &Point) -> Result<Point> {
        if !d.is_finite() {
            return Err(Error::NonFiniteValue("lmo direction".into()));
        }
        match *self {
            Domain::EuclideanBall { radius } => {
                let norm = d.norm();
                if norm == 0.0 {
                    Ok(Point::zeros(d.layout()))
                } else {
                    Ok(d.scaled(-radius / norm))
                }
            }
            Domain::NuclearBall { delta } => {
                Point::with_layout(lmo_nuclear(d.as_matrix(), delta)?, d.layout())
            }
        }
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        if !x.is_finite() {
            return Err(Error::NonFiniteValue("projection input".into()));
        }
        match *self {
            Domain::EuclideanBall { radius } => {
                let norm = x.norm();
                if norm <= radius {
                    Ok(x.clone())
                } else {
                    Ok(x.scaled(radius / norm))
                }
            }
            Domain::NuclearBall { delta } => {
                Point::with_layout(project_nuclear(x.as_matrix(), delta)?, x.layout())
            }
        }
    }

    /// Minimizer of `⟨c, v⟩` over the domain cut by `⟨a, v⟩ ≤ b`.
    ///
    /// A Euclidean ball is the nuclear ball of a single-column matrix, so both
    /// domains share the same oracle.
    pub fn sliced_lmo(
        &self,
        c: &Point,
        a: &Point,
        b: f64,
        opts: &SnbOptions,
    ) -> Result<SncbSolution> {
        let prob = OracleMatrixProblem {
            c: c.as_matrix().clone(),
            a: a.as_matrix().clone(),
            b,
            delta: self.radius(),
        };
        snb_lo(&prob, opts)
    }

    /// A random point strictly inside the domain.
    pub fn sample_interior(&self, layout: Layout, rng: &mut impl Rng) -> Point {
        let (n, p) = layout.shape();
        let m = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = Point::with_layout(m, layout).expect("shape matches layout");
        let gauge = self.gauge(&x);
        let target =
            self.radius() * 0.95 * rng.random::<f64>().powf(1.0 / layout.len().max(1) as f64);
        if gauge == 0.0 {
            x
        } else {
            x.scaled(target / gauge)
        }
    }
}

/// A simple bilevel problem: minimize `f` over the minimizers of `g` on a
/// compact convex domain.
pub trait BilevelProblem: Send + Sync {
    fn name(&self) -> &str;
    fn layout(&self) -> Layout;
    fn domain(&self) -> Domain;

    fn f(&self, x: &Point) -> f64;
    fn grad_f(&self, x: &Point) -> Point;
    fn g(&self, x: &Point) -> f64;
    fn grad_g(&self, x: &Point) -> Point;

    fn constants(&self) -> Constants;
    fn metadata(&self) -> &InstanceMetadata;
    fn initial_point(&self) -> Point;

    fn lmo(&self, d: &Point) -> Result<Point> {
        d.check_layout(self.layout())?;
        self.domain().lmo(d)
    }

    fn has_projection(&self) -> bool {
        true
    }

    fn project(&self, x: &Point) -> Result<Point> {
        if !self.has_projection() {
            return Err(Error::MissingProjection);
        }
        x.check_layout(self.layout())?;
        self.domain().project(x)
    }

    fn sliced_lmo(&self, c: &Point, a: &Point, b: f64, opts: &SnbOptions) -> Result<SncbSolution> {
        c.check_layout(self.layout())?;
        a.check_layout(self.layout())?;
        self.domain().sliced_lmo(c, a, b, opts)
    }

    fn contains(&self, x: &Point) -> bool {
        x.layout() == self.layout() && self.domain().contains(x, MEMBERSHIP_TOL)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "regularization weight {sigma} must be positive"
        )))
    }
}

/// `σ·f(x) + g(x)`.
pub fn eval_phi(problem: &dyn BilevelProblem, sigma: f64, x: &Point) -> Result<f64> {
    check_sigma(sigma)?;
    x.check_layout(problem.layout())?;
    let f = ensure_finite(problem.f(x), "outer objective")?;
    let g = ensure_finite(problem.g(x), "inner objective")?;
    Ok(sigma * f + g)
}

/// `σ·∇f(x) + ∇g(x)`.
pub fn grad_phi(problem: &dyn BilevelProblem, sigma: f64, x: &Point) -> Result<Point> {
    check_sigma(sigma)?;
    x.check_layout(problem.layout())?;
    let mut out = problem.grad_g(x);
    out.axpy(sigma, &problem.grad_f(x));
    if !out.is_finite() {
        return Err(Error::NonFiniteValue("regularized gradient".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_err_f: f64,
    pub max_rel_err_g: f64,
    pub points: Vec<Point>,
}

const DIRECTIONS_PER_POINT: usize = 4;

/// Central finite differences of both objectives along random unit
/// directions at random interior points.
///
/// The error of a directional derivative is measured relative to
/// `max(|∇h(x)·e|, ‖∇h(x)‖)`.
pub fn check_gradients(
    problem: &dyn BilevelProblem,
    samples: usize,
    h: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    if samples == 0 || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gradient check with {samples} samples, step {h}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = problem.layout();
    let domain = problem.domain();
    let mut report = GradCheckReport {
        max_rel_err_f: 0.0,
        max_rel_err_g: 0.0,
        points: Vec::with_capacity(samples),
    };
    for _ in 0..samples {
        let x = domain.sample_interior(layout, &mut rng);
        let gf = problem.grad_f(&x);
        let gg = problem.grad_g(&x);
        for _ in 0..DIRECTIONS_PER_POINT {
            let dir = DVector::from_fn(layout.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let (n, p) = layout.shape();
            let e = Point::with_layout(DMatrix::from_column_slice(n, p, dir.as_slice()), layout)?;
            let e = e.scaled(1.0 / e.norm());
            let xp = x.clone() + e.scaled(h);
            let xm = x.clone() - e.scaled(h);
            let err_f = directional_error(|y| problem.f(y), &gf, &xp, &xm, &e, h)?;
            let err_g = directional_error(|y| problem.g(y), &gg, &xp, &xm, &e, h)?;
            report.max_rel_err_f = report.max_rel_err_f.max(err_f);
            report.max_rel_err_g = report.max_rel_err_g.max(err_g);
        }
        report.points.push(x);
    }
    Ok(report)
}

fn directional_error(
    h_fn: impl Fn(&Point) -> f64,
    grad: &Point,
    xp: &Point,
    xm: &Point,
    e: &Point,
    h: f64,
) -> Result<f64> {
    let fp = ensure_finite(h_fn(xp), "objective in gradient check")?;
    let fm = ensure_finite(h_fn(xm), "objective in gradient check")?;
    let fd = (fp - fm) / (2.0 * h);
    let an = grad.dot(e);
    if !an.is_finite() {
        return Err(Error::NonFiniteValue("gradient in gradient check".into()));
    }
    let scale = an.abs().max(grad.norm());
    if scale == 0.0 {
        return Ok(fd.abs());
    }
    Ok((fd - an).abs() / scale)
}
