use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Thin singular value decomposition `X = U·diag(s)·Vᵀ` with `s` nonincreasing.
#[derive(Clone, Debug)]
pub struct DenseSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

fn to_faer(x: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

fn failed() -> Error {
    Error::NonConvergence {
        what: "dense SVD".into(),
        iterations: 0,
    }
}

pub fn dense_svd(x: &DMatrix<f64>) -> Result<DenseSvd> {
    let svd = to_faer(x).thin_svd().map_err(|_| failed())?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = x.nrows().min(x.ncols());
    Ok(DenseSvd {
        u: DMatrix::from_fn(x.nrows(), k, |i, j| u[(i, j)]),
        singular_values: (0..k).map(|i| s[i]).collect(),
        v_t: DMatrix::from_fn(k, x.ncols(), |i, j| v[(j, i)]),
    })
}

pub fn dense_singular_values(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    to_faer(x).singular_values().map_err(|_| failed())
}
