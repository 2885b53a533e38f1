use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::point::{Layout, Point};
use crate::problem::{BilevelProblem, Constants, Domain, InstanceMetadata, Known};
use crate::problems::data::Observations;

/// `g(X) = ½ Σ_Ω (X_ij − M_ij)²` and `f(X) = ½‖UX‖²_F` with the centering
/// matrix `U = I − 11ᵀ/n`, over the nuclear ball of radius `delta`.
#[derive(Clone, Debug)]
pub struct MatrixCompletionProblem {
    obs: Observations,
    delta: f64,
    metadata: InstanceMetadata,
}

impl MatrixCompletionProblem {
    pub fn new(obs: Observations, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("nuclear radius {delta}")));
        }
        if obs.n_rows() == 0 || obs.n_cols() == 0 {
            return Err(Error::InvalidArgument("empty matrix shape".into()));
        }
        let metadata = InstanceMetadata {
            min_f_over_x: Some(Known::analytic(0.0)),
            ..InstanceMetadata::default()
        };
        Ok(MatrixCompletionProblem {
            obs,
            delta,
            metadata,
        })
    }

    pub fn observations(&self) -> &Observations {
        &self.obs
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn centered(x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows() as f64;
        let mut out = x.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
        }
        out
    }
}

impl BilevelProblem for MatrixCompletionProblem {
    fn name(&self) -> &str {
        "matrix_completion"
    }
    fn layout(&self) -> Layout {
        Layout::Matrix(self.obs.n_rows(), self.obs.n_cols())
    }
    fn domain(&self) -> Domain {
        Domain::NuclearBall { delta: self.delta }
    }
    fn f(&self, x: &Point) -> f64 {
        0.5 * Self::centered(x.as_matrix()).norm_squared()
    }
    fn grad_f(&self, x: &Point) -> Point {
        Point::from_matrix(Self::centered(x.as_matrix()))
    }
    fn g(&self, x: &Point) -> f64 {
        let m = x.as_matrix();
        0.5 * self
            .obs
            .entries()
            .iter()
            .map(|&(i, j, v)| (m[(i, j)] - v).powi(2))
            .sum::<f64>()
    }
    fn grad_g(&self, x: &Point) -> Point {
        let m = x.as_matrix();
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for &(i, j, v) in self.obs.entries() {
            out[(i, j)] = m[(i, j)] - v;
        }
        Point::from_matrix(out)
    }
    fn constants(&self) -> Constants {
        Constants {
            lf: 1.0,
            lg: 1.0,
            diameter: 2.0 * self.delta,
        }
    }
    fn metadata(&self) -> &InstanceMetadata {
        &self.metadata
    }
    /// `0.01·δ·[I_p/p | 0]ᵀ`, truncated when there are fewer rows than columns.
    fn initial_point(&self) -> Point {
        let (n, p) = (self.obs.n_rows(), self.obs.n_cols());
        let mut x = DMatrix::zeros(n, p);
        for i in 0..n.min(p) {
            x[(i, i)] = 0.01 * self.delta / p as f64;
        }
        Point::from_matrix(x)
    }
}
