use std::time::{SystemTime, UNIX_EPOCH};

/// Column names of a trace, in file order.
pub const COLUMNS: [&str; 9] = [
    "t",
    "elapsed_s",
    "f_x",
    "g_x",
    "f_z",
    "g_z",
    "sigma_t",
    "alpha_t",
    "S_t",
];

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub elapsed_s: f64,
    pub f_x: f64,
    pub g_x: f64,
    pub f_z: Option<f64>,
    pub g_z: Option<f64>,
    pub sigma_t: Option<f64>,
    /// Step that produced `x_t`; empty at `t = 0`.
    pub alpha_t: Option<f64>,
    pub s_t: Option<f64>,
}

impl TraceRow {
    /// Value of a raw column by name; `t` and `elapsed_s` are always present.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "t" => Some(self.t as f64),
            "elapsed_s" => Some(self.elapsed_s),
            "f_x" => Some(self.f_x),
            "g_x" => Some(self.g_x),
            "f_z" => self.f_z,
            "g_z" => self.g_z,
            "sigma_t" => self.sigma_t,
            "alpha_t" => self.alpha_t,
            "S_t" => self.s_t,
            _ => None,
        }
    }

    /// Same values apart from wall time.
    pub fn same_values(&self, other: &TraceRow) -> bool {
        TraceRow {
            elapsed_s: 0.0,
            ..self.clone()
        } == TraceRow {
            elapsed_s: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    MaxIters,
    TimeLimit,
    Failed(String),
}

impl Termination {
    pub fn as_str(&self) -> String {
        match self {
            Termination::MaxIters => "max_iters".into(),
            Termination::TimeLimit => "time_limit".into(),
            Termination::Failed(msg) => format!("failed: {msg}"),
        }
    }

    pub fn parse(s: &str) -> Termination {
        match s {
            "max_iters" => Termination::MaxIters,
            "time_limit" => Termination::TimeLimit,
            other => {
                Termination::Failed(other.strip_prefix("failed: ").unwrap_or(other).to_string())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceHeader {
    pub solver: String,
    pub instance: String,
    pub config: Vec<(String, String)>,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub start_time: u64,
    pub f_opt: Option<f64>,
    pub g_opt: Option<f64>,
    pub g_opt_source: Option<String>,
    pub termination: Termination,
}

impl TraceHeader {
    pub fn new(solver: impl Into<String>, instance: impl Into<String>) -> Self {
        TraceHeader {
            solver: solver.into(),
            instance: instance.into(),
            config: Vec::new(),
            seed: 0,
            start_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            f_opt: None,
            g_opt: None,
            g_opt_source: None,
            termination: Termination::MaxIters,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn new(header: TraceHeader) -> Self {
        RunTrace {
            header,
            rows: Vec::new(),
        }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Raw column values, or derived gaps `f_x_gap`, `g_x_gap`, `f_z_gap`,
    /// `g_z_gap` against the reference values in the header.
    pub fn series(&self, column: &str) -> Option<Vec<(usize, f64)>> {
        let (base, reference) = match column.strip_suffix("_gap") {
            Some(base @ ("f_x" | "f_z")) => (base, Some(self.header.f_opt?)),
            Some(base @ ("g_x" | "g_z")) => (base, Some(self.header.g_opt?)),
            Some(_) => return None,
            None if COLUMNS.contains(&column) => (column, None),
            None => return None,
        };
        Some(
            self.rows
                .iter()
                .filter_map(|r| r.column(base).map(|v| (r.t, v - reference.unwrap_or(0.0))))
                .collect(),
        )
    }

    /// Checks ordering and finiteness of the rows.
    pub fn validate(&self) -> Result<(), String> {
        for w in self.rows.windows(2) {
            if w[1].t <= w[0].t {
                return Err(format!("t not increasing at {}", w[1].t));
            }
            if w[1].elapsed_s < w[0].elapsed_s {
                return Err(format!("elapsed time decreasing at t = {}", w[1].t));
            }
        }
        for r in &self.rows {
            let all = COLUMNS.iter().filter_map(|c| r.column(c));
            if all.into_iter().any(|v| !v.is_finite()) {
                return Err(format!("non-finite value at t = {}", r.t));
            }
        }
        Ok(())
    }
}

/// Receives every recorded row as the run progresses.
pub trait Observer {
    fn on_row(&mut self, row: &TraceRow);
}
