//! CSV trace files.
//!
//! A trace file starts with `# key=value` header lines, followed by the
//! column header and one row per recorded iteration. Reals are written with
//! 17 significant digits; absent values are empty cells.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bilevel_core::trace::{RunTrace, Termination, TraceHeader, TraceRow, COLUMNS};

use crate::error::{HarnessError, Result};

/// `<instance>__<solver>.csv`.
pub fn trace_file_name(instance: &str, solver: &str) -> String {
    format!("{instance}__{solver}.csv")
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn render_trace(trace: &RunTrace) -> String {
    let h = &trace.header;
    let mut out = String::new();
    let _ = writeln!(out, "# solver={}", h.solver);
    let _ = writeln!(out, "# instance={}", h.instance);
    let _ = writeln!(out, "# seed={}", h.seed);
    let _ = writeln!(out, "# start_time={}", h.start_time);
    if let Some(v) = h.f_opt {
        let _ = writeln!(out, "# f_opt={}", real(v));
    }
    if let Some(v) = h.g_opt {
        let _ = writeln!(out, "# g_opt={}", real(v));
    }
    if let Some(s) = &h.g_opt_source {
        let _ = writeln!(out, "# g_opt_source={s}");
    }
    let _ = writeln!(
        out,
        "# termination={}",
        h.termination.as_str().replace('\n', " ")
    );
    for (k, v) in &h.config {
        let _ = writeln!(out, "# config.{k}={}", v.replace('\n', " "));
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in &trace.rows {
        let cells = [
            r.t.to_string(),
            real(r.elapsed_s),
            real(r.f_x),
            real(r.g_x),
            opt_real(r.f_z),
            opt_real(r.g_z),
            opt_real(r.sigma_t),
            opt_real(r.alpha_t),
            opt_real(r.s_t),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trace(trace: &RunTrace, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_trace(trace))?;
    Ok(())
}

/// Writes `trace` into `dir` under its standard file name.
pub fn write_trace_in(trace: &RunTrace, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let path = dir.as_ref().join(trace_file_name(
        &trace.header.instance,
        &trace.header.solver,
    ));
    write_trace(trace, &path)?;
    Ok(path)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<RunTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_trace(&text, path)
}

pub fn parse_trace(text: &str, path: &Path) -> Result<RunTrace> {
    let bad = |line: usize, message: String| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut header = TraceHeader::new("", "");
    header.start_time = 0;
    let mut rows = Vec::new();
    let mut saw_columns = false;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if saw_columns {
                return Err(bad(line_no, "header line after the column names".into()));
            }
            let (key, value) = meta
                .trim_start()
                .split_once('=')
                .ok_or_else(|| bad(line_no, "expected key=value".into()))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(line_no, format!("bad number '{v}'")))
            };
            match key {
                "solver" => header.solver = value.to_string(),
                "instance" => header.instance = value.to_string(),
                "seed" => {
                    header.seed = value
                        .parse()
                        .map_err(|_| bad(line_no, format!("bad seed '{value}'")))?
                }
                "start_time" => {
                    header.start_time = value
                        .parse()
                        .map_err(|_| bad(line_no, format!("bad start time '{value}'")))?
                }
                "f_opt" => header.f_opt = Some(num(value)?),
                "g_opt" => header.g_opt = Some(num(value)?),
                "g_opt_source" => header.g_opt_source = Some(value.to_string()),
                "termination" => header.termination = Termination::parse(value),
                other => match other.strip_prefix("config.") {
                    Some(cfg) => header.config.push((cfg.to_string(), value.to_string())),
                    None => return Err(bad(line_no, format!("unknown header key '{other}'"))),
                },
            }
            continue;
        }
        if !saw_columns {
            let names: Vec<&str> = line.split(',').map(str::trim).collect();
            if names != COLUMNS {
                return Err(bad(
                    line_no,
                    format!("expected columns {}", COLUMNS.join(",")),
                ));
            }
            saw_columns = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != COLUMNS.len() {
            return Err(bad(
                line_no,
                format!("expected {} cells, found {}", COLUMNS.len(), cells.len()),
            ));
        }
        let req = |i: usize| -> Result<f64> {
            cells[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(line_no, format!("bad {} '{}'", COLUMNS[i], cells[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if cells[i].trim().is_empty() {
                Ok(None)
            } else {
                req(i).map(Some)
            }
        };
        rows.push(TraceRow {
            t: cells[0]
                .trim()
                .parse()
                .map_err(|_| bad(line_no, format!("bad t '{}'", cells[0])))?,
            elapsed_s: req(1)?,
            f_x: req(2)?,
            g_x: req(3)?,
            f_z: opt(4)?,
            g_z: opt(5)?,
            sigma_t: opt(6)?,
            alpha_t: opt(7)?,
            s_t: opt(8)?,
        });
    }
    if !saw_columns {
        return Err(bad(text.lines().count(), "missing column header".into()));
    }
    let trace = RunTrace { header, rows };
    trace.validate().map_err(|m| bad(0, m))?;
    Ok(trace)
}
