//! SVG line plots of trace columns, with one two-column `.dat` sidecar per
//! series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bilevel_core::trace::RunTrace;

use crate::error::{HarnessError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Points removed because they cannot be drawn on a log axis.
    pub dropped: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct PlotOptions {
    pub t_min: Option<usize>,
    pub t_max: Option<usize>,
    /// Forces the y-axis scale; by default it is logarithmic when every
    /// column is a `_gap` column.
    pub log_y: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct PlotOutput {
    pub svg: PathBuf,
    pub sidecars: Vec<PathBuf>,
    pub series: Vec<Series>,
}

fn is_gap(column: &str) -> bool {
    column.ends_with("_gap")
}

pub fn collect_series(
    traces: &[RunTrace],
    columns: &[&str],
    opts: &PlotOptions,
) -> Result<(Vec<Series>, bool)> {
    let log_y = opts
        .log_y
        .unwrap_or_else(|| columns.iter().all(|c| is_gap(c)));
    let mut out = Vec::new();
    for trace in traces {
        for &column in columns {
            let raw = trace
                .series(column)
                .ok_or_else(|| match column.strip_suffix("_gap") {
                    Some(_) => HarnessError::InsufficientData(format!(
                        "'{column}' needs a reference value in the header of {}",
                        trace.header.solver
                    )),
                    None => HarnessError::UnknownColumn(column.to_string()),
                })?;
            let in_window = raw.into_iter().filter(|&(t, _)| {
                opts.t_min.is_none_or(|lo| t >= lo) && opts.t_max.is_none_or(|hi| t <= hi)
            });
            let (points, dropped): (Vec<_>, Vec<_>) = in_window
                .map(|(t, v)| (t as f64, v))
                .partition(|&(_, v)| v.is_finite() && (!log_y || v > 0.0));
            out.push(Series {
                label: format!("{} {}", trace.header.solver, column),
                points,
                dropped,
            });
        }
    }
    if out.iter().all(|s| s.points.is_empty()) {
        return Err(HarnessError::InsufficientData(
            "no points to plot in the requested window".into(),
        ));
    }
    Ok((out, log_y))
}

fn nice_ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
        let step = ((b - a) / 8).max(1);
        (a..=b).step_by(step as usize).map(f64::from).collect()
    } else {
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        let raw = span / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let start = (lo / step).ceil() as i64;
        let end = (hi / step).floor() as i64;
        (start..=end).map(|k| k as f64 * step).collect()
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v as i32)
    } else if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1e6).round() / 1e6)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render_svg(series: &[Series], log_y: bool, title: &str) -> String {
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_Y + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for v in nice_ticks(y0, y1, log_y)
        .into_iter()
        .filter(|v| *v >= y0 && *v <= y1)
    {
        let y = py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            tick_label(v, log_y)
        );
    }
    for v in nice_ticks(x0, x1, false)
        .into_iter()
        .filter(|v| *v >= x0 && *v <= x1)
    {
        let x = px(v);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_Y + plot_h + 16.0,
            tick_label(v, false)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(ty(y))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = MARGIN_Y + 16.0 * k as f64 + 8.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn sidecar_text(s: &Series) -> String {
    let mut out = format!("# {}\n", s.label);
    for &(t, v) in &s.dropped {
        let _ = writeln!(out, "# dropped t={t} value={v:.16e}");
    }
    for &(t, v) in &s.points {
        let _ = writeln!(out, "{t} {v:.16e}");
    }
    out
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `out_path` and one sidecar `<stem>.<k>.<label>.dat` per series.
pub fn emit_plot(
    traces: &[RunTrace],
    columns: &[&str],
    out_path: impl AsRef<Path>,
    opts: &PlotOptions,
) -> Result<PlotOutput> {
    let out_path = out_path.as_ref();
    let (series, log_y) = collect_series(traces, columns, opts)?;
    let title = format!(
        "{}{}",
        columns.join(", "),
        if log_y { " (log scale)" } else { "" }
    );
    std::fs::write(out_path, render_svg(&series, log_y, &title))?;
    let stem = out_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot");
    let dir = out_path.parent().unwrap_or(Path::new("."));
    let mut sidecars = Vec::new();
    for (k, s) in series.iter().enumerate() {
        let path = dir.join(format!("{stem}.{k}.{}.dat", slug(&s.label)));
        std::fs::write(&path, sidecar_text(s))?;
        sidecars.push(path);
    }
    Ok(PlotOutput {
        svg: out_path.to_path_buf(),
        sidecars,
        series,
    })
}
