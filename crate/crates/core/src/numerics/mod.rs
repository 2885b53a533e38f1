//! Scalar and spectral primitives.

mod brent;
mod simplex;
mod spectral;
mod svd;

pub use brent::brent_min;
pub use simplex::simplex_cap_projection;
pub(crate) use spectral::top_eigenvector;
pub use spectral::{
    leading_eigenspace, leading_singular_triplet, spectral_norm, Eigenspace, Gram, SingularTriplet,
    SymmetricOperator, LANCZOS_TOL, REL_GAP_TOL, ZERO_TOL,
};
pub use svd::{dense_singular_values, dense_svd, DenseSvd};
