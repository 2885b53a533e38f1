use bilevel_core::trace::RunTrace;

use crate::error::{HarnessError, Result};

/// Least-squares fit of `log(value) = intercept + slope·log(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub column: String,
    pub t_min: usize,
    pub t_max: usize,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub points: usize,
    /// Rows in the window whose value was not positive.
    pub dropped: usize,
}

pub const MIN_POINTS: usize = 10;

/// Fits the rows of `column` with `t_min ≤ t ≤ t_max`. Columns ending in
/// `_gap` are taken relative to the reference values in the trace header.
pub fn rate_fit(trace: &RunTrace, column: &str, t_min: usize, t_max: usize) -> Result<RateFit> {
    if t_min >= t_max {
        return Err(HarnessError::InsufficientData(format!(
            "empty window [{t_min}, {t_max}]"
        )));
    }
    let series = trace
        .series(column)
        .ok_or_else(|| match column.strip_suffix("_gap") {
            Some(_) => HarnessError::InsufficientData(format!(
                "'{column}' needs a reference value in the trace header"
            )),
            None => HarnessError::UnknownColumn(column.to_string()),
        })?;
    let window: Vec<(f64, f64)> = series
        .into_iter()
        .filter(|&(t, _)| t >= t_min.max(1) && t <= t_max)
        .map(|(t, v)| (t as f64, v))
        .collect();
    fit_points(column, t_min, t_max, &window)
}

/// Same fit over explicit `(t, value)` pairs.
pub fn fit_points(
    column: &str,
    t_min: usize,
    t_max: usize,
    points: &[(f64, f64)],
) -> Result<RateFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0 && v.is_finite())
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    let dropped = points.len() - kept.len();
    let n = kept.len();
    if n < MIN_POINTS {
        return Err(HarnessError::InsufficientData(format!(
            "{n} positive values of '{column}' in [{t_min}, {t_max}] ({dropped} dropped), need {MIN_POINTS}"
        )));
    }
    let nf = n as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(HarnessError::InsufficientData(format!(
            "all points of '{column}' share one t"
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = kept
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let slope_stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(RateFit {
        column: column.to_string(),
        t_min,
        t_max,
        slope,
        intercept,
        slope_stderr,
        points: n,
        dropped,
    })
}
