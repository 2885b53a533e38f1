//! Linear minimization and projection oracles over the nuclear-norm ball.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{
    brent_min, dense_singular_values, dense_svd, leading_eigenspace, leading_singular_triplet,
    simplex_cap_projection, spectral_norm, top_eigenvector, Gram, LANCZOS_TOL, REL_GAP_TOL,
    ZERO_TOL,
};

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue(what.to_string()))
    }
}

fn check_radius(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("nuclear radius {delta}")))
    }
}

/// `Tr(AᵀB)`.
pub fn trace_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Sum of singular values.
pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    dense_singular_values(x)
        .map(|s| s.iter().sum())
        .unwrap_or(f64::NAN)
}

/// Minimizer of `Tr(CᵀV)` over `‖V‖_* ≤ delta`: `−delta·u·vᵀ` for the leading
/// singular pair of `C`, or zero when `C` is numerically zero.
pub fn lmo_nuclear(c: &DMatrix<f64>, delta: f64) -> Result<DMatrix<f64>> {
    check_radius(delta)?;
    check_finite(c, "nuclear lmo direction")?;
    match leading_singular_triplet(c, LANCZOS_TOL) {
        Ok(t) => Ok(&t.u * t.v.transpose() * (-delta)),
        Err(Error::ZeroMatrix) => Ok(DMatrix::zeros(c.nrows(), c.ncols())),
        Err(e) => Err(e),
    }
}

/// Bilevel linear oracle: among the rank-one minimizers of `Tr(PᵀV)` over the
/// nuclear ball, one minimizing `Tr(QᵀV)`.
pub fn nb_blo(p: &DMatrix<f64>, q: &DMatrix<f64>, delta: f64) -> Result<DMatrix<f64>> {
    nb_blo_with_gap(p, q, delta, REL_GAP_TOL)
}

pub fn nb_blo_with_gap(
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    delta: f64,
    rel_gap_tol: f64,
) -> Result<DMatrix<f64>> {
    Ok(nb_blo_parts(p, q, delta, rel_gap_tol)?.0)
}

/// Returns the oracle output, `σ_max(P)` and the top eigenvalue of the
/// restricted tie-break form.
fn nb_blo_parts(
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    delta: f64,
    rel_gap_tol: f64,
) -> Result<(DMatrix<f64>, f64, f64)> {
    check_radius(delta)?;
    check_finite(p, "bilevel oracle P")?;
    check_finite(q, "bilevel oracle Q")?;
    if p.shape() != q.shape() {
        return Err(Error::InvalidArgument(format!(
            "bilevel oracle shapes {:?} and {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let space = leading_eigenspace(&Gram(p), rel_gap_tol)?;
    let sigma = space.lambda_max.sqrt();
    if sigma <= ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    let r = &space.basis;
    let qtp = q.tr_mul(p);
    let sym = (&qtp + qtp.transpose()) * 0.5;
    let s = r.tr_mul(&(sym * r));
    let s1 = top_eigenvector(&s);
    let mu = s1.dot(&(&s * &s1));
    let w = r * s1;
    Ok(((p * &w) * w.transpose() * (-delta / sigma), sigma, mu))
}

/// Data of `min Tr(CᵀV)` subject to `‖V‖_* ≤ delta` and `Tr(AᵀV) ≤ b`.
#[derive(Clone, Debug)]
pub struct OracleMatrixProblem {
    pub c: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: f64,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct SnbOptions {
    /// Mix two face elements so the cut is tight when the multiplier is positive.
    pub correction: bool,
    pub rel_gap_tol: f64,
    /// Relative tolerance of the boundary test `b = −delta·σ_max(A)`.
    pub tol_eq: f64,
    pub feas_tol: f64,
    pub cert_tol: f64,
    pub brent_tol: f64,
    pub brent_cap: usize,
}

impl Default for SnbOptions {
    fn default() -> Self {
        SnbOptions {
            correction: true,
            rel_gap_tol: REL_GAP_TOL,
            tol_eq: 1e-9,
            feas_tol: 1e-10,
            cert_tol: 1e-6,
            brent_tol: 1e-12,
            brent_cap: 500,
        }
    }
}

impl SnbOptions {
    /// Dual line search and a single bilevel oracle call, no correction.
    pub fn literal() -> Self {
        SnbOptions {
            correction: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SncbBranch {
    ZeroConstraint,
    Boundary,
    Slater,
}

#[derive(Clone, Debug)]
pub struct SncbSolution {
    pub v: DMatrix<f64>,
    pub lambda_star: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub certified: bool,
    pub branch: SncbBranch,
}

impl SncbSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }
}

fn finish(
    prob: &OracleMatrixProblem,
    v: DMatrix<f64>,
    lambda_star: f64,
    dual_value: f64,
    branch: SncbBranch,
    cert_tol: f64,
) -> SncbSolution {
    let primal_value = trace_inner(&prob.c, &v);
    let certified = (primal_value - dual_value).abs() <= cert_tol * (1.0 + dual_value.abs());
    SncbSolution {
        v,
        lambda_star,
        primal_value,
        dual_value,
        certified,
        branch,
    }
}

/// Linear oracle over the nuclear ball cut by one half-space, solved through
/// the one-dimensional Lagrangian dual `δ·σ_max(C + λA) + bλ`.
pub fn snb_lo(prob: &OracleMatrixProblem, opts: &SnbOptions) -> Result<SncbSolution> {
    let OracleMatrixProblem { c, a, b, delta } = prob;
    let (b, delta) = (*b, *delta);
    check_radius(delta)?;
    check_finite(c, "sliced oracle C")?;
    check_finite(a, "sliced oracle A")?;
    if !b.is_finite() {
        return Err(Error::NonFiniteValue("sliced oracle b".into()));
    }
    if c.shape() != a.shape() {
        return Err(Error::InvalidArgument(format!(
            "sliced oracle shapes {:?} and {:?}",
            c.shape(),
            a.shape()
        )));
    }

    let sigma_a = spectral_norm(a)?;
    let sigma_c = spectral_norm(c)?;

    if sigma_a <= ZERO_TOL {
        if b < -opts.feas_tol {
            return Err(Error::InfeasibleOracle(format!(
                "zero constraint with b = {b}"
            )));
        }
        let v = lmo_nuclear(c, delta)?;
        return Ok(finish(
            prob,
            v,
            0.0,
            -delta * sigma_c,
            SncbBranch::ZeroConstraint,
            opts.cert_tol,
        ));
    }

    let min_trace = -delta * sigma_a;
    let slack_tol = opts.tol_eq * min_trace.abs().max(1.0);
    if b < min_trace - slack_tol {
        return Err(Error::InfeasibleOracle(format!(
            "b = {b} below the attainable minimum {min_trace}"
        )));
    }
    if b <= min_trace + opts.tol_eq * min_trace.abs() {
        // No finite dual maximizer exists here; the reported dual value is the
        // limit of the dual function as the multiplier grows.
        let (v, sigma, mu) = nb_blo_parts(a, c, delta, opts.rel_gap_tol)?;
        let dual = -delta * mu / sigma;
        return Ok(finish(
            prob,
            v,
            f64::INFINITY,
            dual,
            SncbBranch::Boundary,
            opts.cert_tol,
        ));
    }

    if sigma_c <= ZERO_TOL {
        let v = if b >= 0.0 {
            DMatrix::zeros(c.nrows(), c.ncols())
        } else {
            lmo_nuclear(a, delta)? * (b / min_trace)
        };
        return Ok(finish(prob, v, 0.0, 0.0, SncbBranch::Slater, opts.cert_tol));
    }

    let dual =
        |lambda: f64| -> Result<f64> { Ok(delta * spectral_norm(&(c + a * lambda))? + b * lambda) };
    let lambda_up = 2.0 * delta * sigma_c / (b + delta * sigma_a);
    let mut failure = None;
    let (lambda_brent, _) = brent_min(
        |lambda| match dual(lambda) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        lambda_up,
        opts.brent_tol * (1.0 + lambda_up),
        opts.brent_cap,
    )
    .map_err(|e| failure.take().unwrap_or(e))?;

    let face = |lambda: f64| -> Result<DMatrix<f64>> {
        match nb_blo_with_gap(&(c + a * lambda), a, delta, opts.rel_gap_tol) {
            // Every point of the ball is on the face; take one on the constraint.
            Err(Error::ZeroMatrix) => Ok(lmo_nuclear(a, delta)? * (b / min_trace).clamp(-1.0, 1.0)),
            other => other,
        }
    };
    let dual_value = |lambda: f64| -> Result<f64> { Ok(-dual(lambda)?) };

    if !opts.correction {
        let v = face(lambda_brent)?;
        let value = dual_value(lambda_brent)?;
        return Ok(finish(
            prob,
            v,
            lambda_brent,
            value,
            SncbBranch::Slater,
            opts.cert_tol,
        ));
    }

    let feas = opts.feas_tol * (1.0 + b.abs());
    let v0 = face(0.0)?;
    if trace_inner(a, &v0) <= b + feas {
        let value = dual_value(0.0)?;
        return Ok(finish(
            prob,
            v0,
            0.0,
            value,
            SncbBranch::Slater,
            opts.cert_tol,
        ));
    }

    let (lambda_star, v_hi, v_lo) = bracket_multiplier(a, b, lambda_brent, lambda_up, &face)?;
    let t_hi = trace_inner(a, &v_hi);
    let mut v = v_hi.clone();
    if t_hi < b {
        let v_plus = match nb_blo_with_gap(&(c + a * lambda_star), &(-a), delta, opts.rel_gap_tol) {
            Ok(m) if trace_inner(a, &m) >= b => m,
            _ => v_lo,
        };
        let t_plus = trace_inner(a, &v_plus);
        if t_plus > t_hi {
            let theta = ((t_plus - b) / (t_plus - t_hi)).clamp(0.0, 1.0);
            v = &v_hi * theta + &v_plus * (1.0 - theta);
        }
    }
    let value = dual_value(lambda_star)?;
    let solution = finish(
        prob,
        v,
        lambda_star,
        value,
        SncbBranch::Slater,
        opts.cert_tol,
    );
    if !solution.certified {
        return Err(Error::DegenerateOracle(format!(
            "duality gap {:e} remains after correction",
            solution.gap()
        )));
    }
    Ok(solution)
}

/// Bisection on the sign of the dual right-derivative `b − Tr(AᵀV(λ))`.
/// The sign test is exact: any slack tolerance here is multiplied by the
/// multiplier in the duality gap.
///
/// Returns the multiplier on the feasible side together with the face
/// elements on both sides of the final bracket.
fn bracket_multiplier<F>(
    a: &DMatrix<f64>,
    b: f64,
    guess: f64,
    lambda_up: f64,
    face: &F,
) -> Result<(f64, DMatrix<f64>, DMatrix<f64>)>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let feasible = |v: &DMatrix<f64>| trace_inner(a, v) <= b;
    let v_guess = face(guess)?;
    let (mut lo, mut hi, mut v_lo, mut v_hi);
    if feasible(&v_guess) {
        hi = guess;
        v_hi = v_guess;
        let mut step = 1e-6 * (1.0 + guess);
        loop {
            let cand = (guess - step).max(0.0);
            let v = face(cand)?;
            if !feasible(&v) {
                lo = cand;
                v_lo = v;
                break;
            }
            hi = cand;
            v_hi = v;
            if cand == 0.0 {
                return Err(Error::DegenerateOracle(
                    "multiplier bracket collapsed at zero".into(),
                ));
            }
            step *= 8.0;
        }
    } else {
        lo = guess;
        v_lo = v_guess;
        let mut step = 1e-6 * (1.0 + guess);
        let mut expansions = 0;
        loop {
            let cand = (guess + step).min(lambda_up * 4.0);
            let v = face(cand)?;
            if feasible(&v) {
                hi = cand;
                v_hi = v;
                break;
            }
            lo = cand;
            v_lo = v;
            step *= 8.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::DegenerateOracle(
                    "no feasible multiplier found".into(),
                ));
            }
        }
    }
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = face(mid)?;
        if feasible(&v) {
            hi = mid;
            v_hi = v;
        } else {
            lo = mid;
            v_lo = v;
        }
    }
    Ok((hi, v_hi, v_lo))
}

/// Frobenius projection onto `‖X‖_* ≤ delta` by projecting singular values.
pub fn project_nuclear(x: &DMatrix<f64>, delta: f64) -> Result<DMatrix<f64>> {
    check_radius(delta)?;
    check_finite(x, "nuclear projection input")?;
    let svd = dense_svd(x)?;
    if svd.singular_values.iter().sum::<f64>() <= delta {
        return Ok(x.clone());
    }
    let s = simplex_cap_projection(&svd.singular_values, delta);
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for (i, &si) in s.iter().enumerate() {
        if si > 0.0 {
            out += svd.u.column(i) * svd.v_t.row(i) * si;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d))
    }

    #[test]
    fn lmo_diagonal() {
        let v = lmo_nuclear(&diag(&[2.0, 1.0]), 1.0).unwrap();
        assert!((v - diag(&[-1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn lmo_zero_direction() {
        let v = lmo_nuclear(&DMatrix::zeros(2, 3), 4.0).unwrap();
        assert_eq!(v, DMatrix::zeros(2, 3));
    }

    #[test]
    fn nb_blo_breaks_ties_with_q() {
        let v = nb_blo(&DMatrix::identity(2, 2), &diag(&[1.0, 2.0]), 1.0).unwrap();
        assert!((v - diag(&[0.0, -1.0])).norm() < 1e-12);
    }

    #[test]
    fn nb_blo_zero_p() {
        let z = DMatrix::zeros(2, 2);
        assert!(matches!(nb_blo(&z, &z, 1.0), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn projection_shrinks_spectrum() {
        let p = project_nuclear(&diag(&[3.0, 1.0]), 2.0).unwrap();
        assert!((p - diag(&[2.0, 0.0])).norm() < 1e-12);
    }
}
