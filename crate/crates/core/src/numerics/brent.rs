use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Bounded Brent minimization of a scalar function on `[lo, hi]`.
///
/// Returns `(argmin, value)`. The endpoints are evaluated after the
/// interior search so that monotone functions return the exact boundary.
pub fn brent_min<F>(mut f: F, lo: f64, hi: f64, tol: f64, cap: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "brent interval [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("brent tolerance {tol}")));
    }
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue(format!("brent objective at {x}")))
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut v = a + GOLDEN * (b - a);
    let mut w = v;
    let mut x = v;
    let mut fx = eval(x)?;
    let mut fv = fx;
    let mut fw = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut iterations = 0;

    loop {
        let xm = 0.5 * (a + b);
        let tol1 = 4.0 * f64::EPSILON * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if iterations >= cap {
            return Err(Error::NonConvergence {
                what: "brent minimization".into(),
                iterations,
            });
        }
        iterations += 1;

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u)?;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let flo = eval(lo)?;
    if flo <= fx {
        x = lo;
        fx = flo;
    }
    let fhi = eval(hi)?;
    if fhi < fx {
        x = hi;
        fx = fhi;
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_interior() {
        let (x, fx) = brent_min(|x| (x - 2.0) * (x - 2.0), 0.0, 5.0, 1e-10, 100).unwrap();
        assert!((x - 2.0).abs() <= 1e-10);
        assert!(fx <= 1e-20);
    }

    #[test]
    fn increasing_goes_to_lower_end() {
        let (x, _) = brent_min(|x| x, 0.0, 1.0, 1e-10, 100).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn kink_minimum() {
        let (x, _) = brent_min(|x| (1.0 - x).abs(), 0.0, 3.0, 1e-10, 200).unwrap();
        assert!((x - 1.0).abs() <= 1e-10, "{x}");
    }

    #[test]
    fn cap_is_enforced() {
        let err = brent_min(|x| (1.0 - x).abs(), 0.0, 3.0, 1e-12, 3).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(brent_min(|x| x, 1.0, 1.0, 1e-8, 10).is_err());
    }
}
