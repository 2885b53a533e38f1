use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Singular values at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-14;

/// Default relative residual tolerance for the Lanczos iteration.
pub const LANCZOS_TOL: f64 = 1e-12;

const START_SEED: u64 = 0x5eed_1a2c;
const MAX_KRYLOV: usize = 64;
const MAX_RESTARTS: usize = 200;

#[derive(Clone, Debug)]
pub struct SingularTriplet {
    pub sigma: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

/// Leading singular triplet of `c` by Lanczos on the smaller Gram matrix.
///
/// Returns [`Error::ZeroMatrix`] when the largest singular value is at most
/// [`ZERO_TOL`]. The first significant coordinate of `u` is positive.
pub fn leading_singular_triplet(c: &DMatrix<f64>, tol: f64) -> Result<SingularTriplet> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("singular triplet input".into()));
    }
    let (n, p) = c.shape();
    if n == 0 || p == 0 || c.norm() <= ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    let (mut u, mut v, sigma);
    if p <= n {
        let (_, vec) = lanczos_top(p, tol, |x| c.tr_mul(&(c * x)))?;
        let cv = c * &vec;
        sigma = cv.norm();
        if sigma <= ZERO_TOL {
            return Err(Error::ZeroMatrix);
        }
        u = cv / sigma;
        v = vec;
    } else {
        let (_, vec) = lanczos_top(n, tol, |x| c * c.tr_mul(x))?;
        let ctu = c.tr_mul(&vec);
        sigma = ctu.norm();
        if sigma <= ZERO_TOL {
            return Err(Error::ZeroMatrix);
        }
        v = ctu / sigma;
        u = c * &v / sigma;
    }
    if leading_sign(&u) < 0.0 {
        u.neg_mut();
        v.neg_mut();
    }
    Ok(SingularTriplet { sigma, u, v })
}

/// Largest singular value, or zero when the matrix is numerically zero.
pub fn spectral_norm(c: &DMatrix<f64>) -> Result<f64> {
    match leading_singular_triplet(c, LANCZOS_TOL) {
        Ok(t) => Ok(t.sigma),
        Err(Error::ZeroMatrix) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn leading_sign(x: &DVector<f64>) -> f64 {
    let scale = x.amax();
    x.iter()
        .find(|v| v.abs() > 1e-10 * scale)
        .map(|v| v.signum())
        .unwrap_or(1.0)
}

fn start_vector(k: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let v = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0) + 0.5);
    let norm = v.norm();
    v / norm
}

/// Largest eigenpair of a symmetric PSD operator of dimension `k` by Lanczos
/// with full reorthogonalization and restarts from the Ritz vector.
///
/// When `k` fits in one Krylov cycle the iteration runs to the full dimension:
/// a residual test alone can accept the second member of a tight cluster.
fn lanczos_top<F>(k: usize, tol: f64, apply: F) -> Result<(f64, DVector<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m_max = k.min(MAX_KRYLOV);
    let exhaustive = k <= MAX_KRYLOV;
    let mut q0 = start_vector(k);
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m_max);
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(q0.clone());
        let mut best = (0.0, q0.clone(), f64::INFINITY);
        for j in 0..m_max {
            let mut w = apply(&basis[j]);
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            for _ in 0..2 {
                for q in &basis {
                    let h = q.dot(&w);
                    w.axpy(-h, q, 1.0);
                }
            }
            let beta = w.norm();
            let last = j + 1 == m_max;
            let scale = alphas
                .iter()
                .fold(0.0_f64, |acc, a| acc.max(a.abs()))
                .max(ZERO_TOL);
            let breakdown = beta <= 1e-13 * scale;
            if last || breakdown || (!exhaustive && j % 4 == 3) {
                let (theta, y) = ritz_top(&alphas, &betas);
                let residual = if breakdown || j + 1 == k {
                    0.0
                } else {
                    beta * y[j].abs()
                };
                let mut ritz = DVector::zeros(k);
                for (i, q) in basis.iter().enumerate() {
                    ritz.axpy(y[i], q, 1.0);
                }
                let norm = ritz.norm();
                ritz /= norm;
                best = (theta, ritz, residual);
                if residual <= tol * theta.max(ZERO_TOL) {
                    return Ok((best.0, best.1));
                }
            }
            if breakdown || last {
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }
        q0 = best.1;
    }
    Err(Error::NonConvergence {
        what: "lanczos".into(),
        iterations: MAX_RESTARTS,
    })
}

fn ritz_top(alphas: &[f64], betas: &[f64]) -> (f64, DVector<f64>) {
    let j = alphas.len();
    let mut t = DMatrix::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = alphas[i];
        if i + 1 < j {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let idx = eig.eigenvalues.imax();
    (
        eig.eigenvalues[idx],
        eig.eigenvectors.column(idx).into_owned(),
    )
}

/// A symmetric linear operator on `R^dim`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Dense matrix of the operator.
    fn materialize(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut m = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            m.set_column(j, &self.apply(&e));
        }
        m
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
    fn materialize(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// The Gram operator `PᵀP`.
pub struct Gram<'a>(pub &'a DMatrix<f64>);

impl SymmetricOperator for Gram<'_> {
    fn dim(&self) -> usize {
        self.0.ncols()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.tr_mul(&(self.0 * x))
    }
    fn materialize(&self) -> DMatrix<f64> {
        self.0.tr_mul(self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub lambda_max: f64,
    /// Orthonormal columns spanning the leading eigenspace.
    pub basis: DMatrix<f64>,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Default relative gap defining the leading eigenspace.
pub const REL_GAP_TOL: f64 = 1e-10;

/// Eigenvectors whose eigenvalues satisfy `λ ≥ (1 − rel_gap_tol)·λ_max`.
pub fn leading_eigenspace(op: &dyn SymmetricOperator, rel_gap_tol: f64) -> Result<Eigenspace> {
    let mut m = op.materialize();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("eigenspace input".into()));
    }
    if m.nrows() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let mt = m.transpose();
    m += mt;
    m *= 0.5;
    let eig = SymmetricEigen::new(m);
    let lambda_max = eig.eigenvalues.max();
    if lambda_max <= ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    let threshold = (1.0 - rel_gap_tol) * lambda_max;
    let mut chosen: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= threshold)
        .collect();
    chosen.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let k = eig.eigenvalues.len();
    let mut basis = DMatrix::zeros(k, chosen.len());
    for (c, &i) in chosen.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        if leading_sign(&col) < 0.0 {
            col.neg_mut();
        }
        basis.set_column(c, &col);
    }
    Ok(Eigenspace { lambda_max, basis })
}

/// Eigenvector of the algebraically largest eigenvalue of a small symmetric matrix.
pub(crate) fn top_eigenvector(s: &DMatrix<f64>) -> DVector<f64> {
    let mut m = s.clone();
    let mt = m.transpose();
    m += mt;
    m *= 0.5;
    let eig = SymmetricEigen::new(m);
    let idx = eig.eigenvalues.imax();
    let mut v = eig.eigenvectors.column(idx).into_owned();
    if leading_sign(&v) < 0.0 {
        v.neg_mut();
    }
    v
}
