//! Summary table over a set of traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use bilevel_core::trace::RunTrace;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    pub solver: String,
    pub iterations: usize,
    /// Smallest `g(x_t) − g_opt`, or smallest `g(x_t)` without a reference.
    pub best_inner: f64,
    pub inner_is_gap: bool,
    /// `f(x_t)` at the iterate attaining `best_inner`.
    pub outer_at_best: f64,
    pub wall_time_s: f64,
    pub termination: String,
}

pub fn summarize(trace: &RunTrace) -> Result<SummaryRow> {
    let last = trace.last().ok_or_else(|| {
        HarnessError::InsufficientData(format!("trace of {} has no rows", trace.header.solver))
    })?;
    let reference = trace.header.g_opt;
    let best = trace
        .rows
        .iter()
        .min_by(|a, b| a.g_x.total_cmp(&b.g_x))
        .expect("trace has at least one row");
    Ok(SummaryRow {
        instance: trace.header.instance.clone(),
        solver: trace.header.solver.clone(),
        iterations: last.t,
        best_inner: best.g_x - reference.unwrap_or(0.0),
        inner_is_gap: reference.is_some(),
        outer_at_best: best.f_x,
        wall_time_s: last.elapsed_s,
        termination: trace.header.termination.as_str(),
    })
}

/// Rows grouped by instance, in input order within each group.
pub fn compare(traces: &[RunTrace]) -> Result<Vec<SummaryRow>> {
    if traces.is_empty() {
        return Err(HarnessError::InsufficientData(
            "no traces to compare".into(),
        ));
    }
    let mut groups: BTreeMap<String, Vec<SummaryRow>> = BTreeMap::new();
    for t in traces {
        let row = summarize(t)?;
        groups.entry(row.instance.clone()).or_default().push(row);
    }
    Ok(groups.into_values().flatten().collect())
}

const HEADERS: [&str; 7] = [
    "solver",
    "iterations",
    "best_inner",
    "outer_at_best",
    "wall_time_s",
    "inner_kind",
    "termination",
];

fn cells(r: &SummaryRow) -> [String; 7] {
    [
        r.solver.clone(),
        r.iterations.to_string(),
        format!("{:.6e}", r.best_inner),
        format!("{:.6e}", r.outer_at_best),
        format!("{:.3}", r.wall_time_s),
        if r.inner_is_gap { "gap" } else { "value" }.to_string(),
        r.termination.clone(),
    ]
}

/// Aligned text, one block per instance.
pub fn render_text(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let mut start = 0;
    while start < rows.len() {
        let instance = &rows[start].instance;
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| &r.instance == instance)
                .count();
        let body: Vec<[String; 7]> = rows[start..end].iter().map(cells).collect();
        let mut widths = HEADERS.map(str::len);
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let _ = writeln!(out, "instance: {instance}");
        let line = |cs: Vec<&str>| {
            cs.iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(HEADERS.to_vec()).trim_end());
        for row in &body {
            let _ = writeln!(
                out,
                "{}",
                line(row.iter().map(String::as_str).collect()).trim_end()
            );
        }
        out.push('\n');
        start = end;
    }
    out
}

pub fn render_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("instance,{}\n", HEADERS.join(","));
    for r in rows {
        let c = cells(r).map(|cell| cell.replace(',', ";"));
        let _ = writeln!(out, "{},{}", r.instance.replace(',', ";"), c.join(","));
    }
    out
}
