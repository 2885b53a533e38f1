//! Explicit non-asymptotic bounds for the power schedule.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateInputs {
    /// `f_opt − min_X f`.
    pub f_gap: f64,
    pub diameter: f64,
    pub lf: f64,
    pub lg: f64,
    pub varsigma: f64,
    pub p: f64,
    pub kappa: Option<f64>,
    pub g_f: Option<f64>,
    /// `g(x_0) − g_opt`.
    pub g0_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateConstants {
    pub c_bound: f64,
    pub v_bound: f64,
    /// Present when `kappa`, `g_f` and `g0_gap` are all supplied.
    pub w_bound: Option<f64>,
    pub inputs: CertificateInputs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    /// Bound on `g(z_t) − g_opt`.
    pub inner: f64,
    /// Bound on `f(z_t) − f_opt`.
    pub outer: f64,
    /// Bound on `g(x_t) − g_opt` under quadratic growth.
    pub inner_accelerated: Option<f64>,
    /// Bound on `f(x_t) − f_opt` under quadratic growth.
    pub outer_accelerated: Option<f64>,
}

/// Largest `w` with `w ≤ a + c·√w`.
pub fn fixed_point_root(a: f64, c: f64) -> f64 {
    let root = (c + (c * c + 4.0 * a).sqrt()) / 2.0;
    root * root
}

pub fn certificate_constants(inputs: CertificateInputs) -> Result<CertificateConstants> {
    let CertificateInputs {
        f_gap,
        diameter,
        lf,
        lg,
        varsigma,
        p,
        ..
    } = inputs;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} must lie in (0, 1)"
        )));
    }
    if !(varsigma > 0.0) || !(diameter > 0.0) || !(lf > 0.0) || !(lg > 0.0) {
        return Err(Error::InvalidArgument(
            "varsigma, D, L_f and L_g must be positive".into(),
        ));
    }
    if !(f_gap >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "f_opt - min f = {f_gap} must be nonnegative"
        )));
    }
    let smooth = varsigma * lf + lg;
    let c_bound = (1.0 + 2.0 * p) * f_gap + 2.0 * smooth * diameter * diameter / varsigma;
    let v_bound = 2.0 * p / 1f64.min(2.0 * (1.0 - p));
    let w_bound = match (inputs.kappa, inputs.g_f, inputs.g0_gap) {
        (Some(kappa), Some(g_f), Some(g0)) => {
            if !(kappa > 0.0) || !(g_f >= 0.0) {
                return Err(Error::InvalidArgument(
                    "kappa must be positive and G_f nonnegative".into(),
                ));
            }
            let sigma0 = varsigma;
            let a = 4.0 * (lf * sigma0 + lg) * diameter * diameter
                + g_f * g_f * varsigma * varsigma / kappa;
            let c = p * 2f64.powf((2.0 * p + 2.0).min(3.0)) * g_f * varsigma / kappa.sqrt();
            Some(g0.max(fixed_point_root(a, c)))
        }
        _ => None,
    };
    Ok(CertificateConstants {
        c_bound,
        v_bound,
        w_bound,
        inputs,
    })
}

impl CertificateConstants {
    pub fn w(&self) -> Result<f64> {
        self.w_bound.ok_or_else(|| {
            Error::MissingMetadata("kappa, G_f and g(x_0) - g_opt are required for W".into())
        })
    }

    /// Bound on `g(x_t) − g_opt` relative to `σ_t`.
    pub fn last_iterate_inner(&self, sigma_t: f64) -> f64 {
        self.c_bound * sigma_t
    }

    /// Bound on `g(z_t) − g_opt` relative to `σ_t`.
    pub fn averaged_inner(&self, sigma_t: f64) -> f64 {
        self.c_bound * (1.0 + self.v_bound) * sigma_t
    }
}

pub fn certificate_bounds_at(t: usize, constants: &CertificateConstants) -> Bounds {
    let CertificateInputs {
        f_gap,
        diameter,
        lf,
        lg,
        varsigma,
        p,
        ..
    } = constants.inputs;
    let tp = t as f64 + 1.0;
    let smooth = 2.0 * (varsigma * lf + lg) * diameter * diameter;
    let outer = smooth / (varsigma * tp.powf(1.0 - p));
    let factor = 1f64.min(2.0 * (1.0 - p)) / (1.0 + 2.0 * p).min(2.0);
    let inner = (varsigma * (1.0 + 2.0 * p) * f_gap + smooth) / (factor * tp.powf(p));
    let inner_accelerated = constants.w_bound.map(|w| w / tp.powf((2.0 * p).min(1.0)));
    let outer_accelerated = constants
        .w_bound
        .map(|w| w / (2.0 * varsigma * tp.powf(p.min(1.0 - p))));
    Bounds {
        inner,
        outer,
        inner_accelerated,
        outer_accelerated,
    }
}
