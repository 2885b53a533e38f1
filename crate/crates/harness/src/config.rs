//! Flat `key = value` run configuration.
//!
//! Lines are `namespace.key = value`; blank lines and lines starting with `#`
//! are ignored. Keys live under `solver.`, `schedule.`, `instance.` and
//! `run.`; anything else is rejected, as are keys that do not apply to the
//! selected instance kind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bilevel_core::baselines::{BiSgParams, CgBioParams, IrPgStep};
use bilevel_core::{PowerSchedule, StepRule};

use crate::error::{HarnessError, Result};

const SOLVER_KEYS: &[&str] = &[
    "solver.names",
    "solver.linesearch_tol",
    "solver.irpg.step",
    "solver.irpg.theta",
    "solver.irpg.alpha0",
    "solver.irpg.eta",
    "solver.irpg.max_backtracks",
    "solver.cgbio.eps_g",
    "solver.cgbio.step",
    "solver.bisg.alpha",
    "solver.bisg.c",
];
const SCHEDULE_KEYS: &[&str] = &["schedule.varsigma", "schedule.p"];
const RUN_KEYS: &[&str] = &[
    "run.max_iters",
    "run.time_limit_s",
    "run.record_every",
    "run.g_opt",
    "run.g_opt_max_iters",
    "run.jobs",
];
const INSTANCE_COMMON: &[&str] = &["instance.kind", "instance.name"];
const LEAST_NORM_KEYS: &[&str] = &[
    "instance.m",
    "instance.n",
    "instance.seed",
    "instance.radius",
];
const BALL_KEYS: &[&str] = &[
    "instance.aq_diag",
    "instance.bq",
    "instance.center",
    "instance.kappa",
];
const SYNTHETIC_KEYS: &[&str] = &[
    "instance.rows",
    "instance.cols",
    "instance.rank",
    "instance.density",
    "instance.noise",
    "instance.seed",
    "instance.delta",
];
const RATINGS_KEYS: &[&str] = &[
    "instance.path",
    "instance.rows",
    "instance.cols",
    "instance.delta",
];

/// A solver selectable by name in `solver.names`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverKind {
    Ircg(StepRule),
    IrPg,
    CgBio,
    BiSg,
}

impl SolverKind {
    pub fn parse(name: &str, line_search_tol: f64) -> Option<Self> {
        Some(match name {
            "ircg-open" => SolverKind::Ircg(StepRule::OpenLoop),
            "ircg-closed" => SolverKind::Ircg(StepRule::ClosedLoop),
            "ircg-linesearch" => SolverKind::Ircg(StepRule::LineSearch {
                tol: line_search_tol,
            }),
            "irpg" => SolverKind::IrPg,
            "cgbio" => SolverKind::CgBio,
            "bisg-simplified" | "bisg" => SolverKind::BiSg,
            _ => return None,
        })
    }

    pub fn id(&self) -> String {
        match self {
            SolverKind::Ircg(rule) => format!("ircg-{}", rule.id()),
            SolverKind::IrPg => "irpg".into(),
            SolverKind::CgBio => "cgbio".into(),
            SolverKind::BiSg => "bisg-simplified".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    LeastNorm {
        m: usize,
        n: usize,
        seed: u64,
        radius: Option<f64>,
    },
    BallQuadratic {
        aq_diag: Vec<f64>,
        bq: Vec<f64>,
        center: Vec<f64>,
        kappa: Option<f64>,
    },
    SyntheticCompletion {
        rows: usize,
        cols: usize,
        rank: usize,
        density: f64,
        noise: f64,
        seed: u64,
        delta: f64,
    },
    Ratings {
        path: PathBuf,
        rows: usize,
        cols: usize,
        delta: f64,
    },
}

impl InstanceSpec {
    pub fn seed(&self) -> u64 {
        match self {
            InstanceSpec::LeastNorm { seed, .. }
            | InstanceSpec::SyntheticCompletion { seed, .. } => *seed,
            _ => 0,
        }
    }

    pub fn set_seed(&mut self, new_seed: u64) {
        if let InstanceSpec::LeastNorm { seed, .. }
        | InstanceSpec::SyntheticCompletion { seed, .. } = self
        {
            *seed = new_seed;
        }
    }

    /// Identifier used in trace file names.
    pub fn default_name(&self) -> String {
        match self {
            InstanceSpec::LeastNorm { m, n, seed, .. } => format!("least_norm_{m}x{n}_s{seed}"),
            InstanceSpec::BallQuadratic { aq_diag, .. } => {
                format!("ball_quadratic_{}", aq_diag.len())
            }
            InstanceSpec::SyntheticCompletion {
                rows, cols, seed, ..
            } => {
                format!("matrix_completion_{rows}x{cols}_s{seed}")
            }
            InstanceSpec::Ratings { .. } => "ratings".into(),
        }
    }
}

/// Where the inner optimal value used for gap columns comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GOptSource {
    /// Instance metadata when available, otherwise an estimate.
    Auto,
    Estimate,
    Value(f64),
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
    pub record_every: usize,
    pub g_opt: GOptSource,
    pub g_opt_max_iters: usize,
    pub jobs: usize,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub solvers: Vec<SolverKind>,
    pub schedule: PowerSchedule,
    pub irpg_step: IrPgStep,
    pub cgbio: CgBioParams,
    pub bisg: BiSgParams,
    pub instance: InstanceSpec,
    pub instance_name: Option<String>,
    pub run: RunSpec,
    /// Every key and value as written, for the trace header.
    pub entries: Vec<(String, String)>,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let raw = parse_pairs(text)?;
        Config::from_pairs(raw)
    }

    pub fn instance_name(&self) -> String {
        self.instance_name
            .clone()
            .unwrap_or_else(|| self.instance.default_name())
    }

    fn from_pairs(raw: Vec<(usize, String, String)>) -> Result<Config> {
        let mut map = BTreeMap::new();
        for (line, key, value) in &raw {
            if map.insert(key.clone(), value.clone()).is_some() {
                return Err(HarnessError::Config {
                    line: *line,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        let kind = map
            .get("instance.kind")
            .cloned()
            .ok_or_else(|| HarnessError::BadValue {
                key: "instance.kind".into(),
                message: "required".into(),
            })?;
        let kind_keys = match kind.as_str() {
            "least_norm" => LEAST_NORM_KEYS,
            "ball_quadratic" => BALL_KEYS,
            "matrix_completion" | "synthetic_completion" => SYNTHETIC_KEYS,
            "ratings" => RATINGS_KEYS,
            other => {
                return Err(HarnessError::BadValue {
                    key: "instance.kind".into(),
                    message: format!("unknown kind '{other}'"),
                })
            }
        };
        for key in map.keys() {
            let known = [
                SOLVER_KEYS,
                SCHEDULE_KEYS,
                RUN_KEYS,
                INSTANCE_COMMON,
                kind_keys,
            ]
            .iter()
            .any(|set| set.contains(&key.as_str()));
            if !known {
                return Err(HarnessError::UnknownKey(key.clone()));
            }
        }
        let get = Getter(&map);

        let line_search_tol = get.or(
            "solver.linesearch_tol",
            bilevel_core::schedule::LINE_SEARCH_TOL,
        )?;
        let names = map
            .get("solver.names")
            .map(String::as_str)
            .unwrap_or("ircg-open");
        let mut solvers = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let kind =
                SolverKind::parse(name, line_search_tol).ok_or_else(|| HarnessError::BadValue {
                    key: "solver.names".into(),
                    message: format!("unknown solver '{name}'"),
                })?;
            solvers.push(kind);
        }
        if solvers.is_empty() {
            return Err(HarnessError::BadValue {
                key: "solver.names".into(),
                message: "no solvers listed".into(),
            });
        }

        let schedule = PowerSchedule::new(
            get.or("schedule.varsigma", 0.05)?,
            get.or("schedule.p", 0.5)?,
        )?;

        let irpg_step = match map
            .get("solver.irpg.step")
            .map(String::as_str)
            .unwrap_or("armijo")
        {
            "armijo" => {
                let IrPgStep::Armijo {
                    theta,
                    alpha0,
                    eta,
                    max_backtracks,
                } = IrPgStep::default()
                else {
                    unreachable!("default step is Armijo")
                };
                IrPgStep::Armijo {
                    theta: get.or("solver.irpg.theta", theta)?,
                    alpha0: get.or("solver.irpg.alpha0", alpha0)?,
                    eta: get.or("solver.irpg.eta", eta)?,
                    max_backtracks: get.or("solver.irpg.max_backtracks", max_backtracks)?,
                }
            }
            "power" => IrPgStep::Power {
                alpha0: get.or("solver.irpg.alpha0", 0.5)?,
                eta: get.or("solver.irpg.eta", 0.5)?,
            },
            "constant" => IrPgStep::Constant(get.or("solver.irpg.alpha0", 0.5)?),
            other => {
                return Err(HarnessError::BadValue {
                    key: "solver.irpg.step".into(),
                    message: format!("expected armijo, power or constant, found '{other}'"),
                })
            }
        };

        let cgbio_rule = match map
            .get("solver.cgbio.step")
            .map(String::as_str)
            .unwrap_or("open")
        {
            "open" => StepRule::OpenLoop,
            "closed" => StepRule::ClosedLoop,
            "linesearch" => StepRule::LineSearch {
                tol: line_search_tol,
            },
            other => {
                return Err(HarnessError::BadValue {
                    key: "solver.cgbio.step".into(),
                    message: format!("expected open, closed or linesearch, found '{other}'"),
                })
            }
        };
        let defaults = CgBioParams::default();
        let cgbio = CgBioParams {
            eps_g: get.or("solver.cgbio.eps_g", defaults.eps_g)?,
            step_rule: cgbio_rule,
            ..defaults
        };
        let bisg_defaults = BiSgParams::default();
        let bisg = BiSgParams {
            alpha: get.or("solver.bisg.alpha", bisg_defaults.alpha)?,
            c: get.or("solver.bisg.c", bisg_defaults.c)?,
        };

        let instance = match kind.as_str() {
            "least_norm" => InstanceSpec::LeastNorm {
                m: get.or("instance.m", 10)?,
                n: get.or("instance.n", 30)?,
                seed: get.or("instance.seed", 7)?,
                radius: get.opt("instance.radius")?,
            },
            "ball_quadratic" => {
                let aq_diag = get
                    .list("instance.aq_diag")?
                    .unwrap_or_else(|| vec![1.0; 5]);
                let n = aq_diag.len();
                InstanceSpec::BallQuadratic {
                    bq: get.list("instance.bq")?.unwrap_or_else(|| vec![0.0; n]),
                    center: get.list("instance.center")?.unwrap_or_else(|| vec![0.0; n]),
                    aq_diag,
                    kappa: get.opt("instance.kappa")?,
                }
            }
            "ratings" => InstanceSpec::Ratings {
                path: PathBuf::from(map.get("instance.path").ok_or_else(|| {
                    HarnessError::BadValue {
                        key: "instance.path".into(),
                        message: "required for ratings instances".into(),
                    }
                })?),
                rows: get.or("instance.rows", bilevel_core::problems::RATINGS_SHAPE.0)?,
                cols: get.or("instance.cols", bilevel_core::problems::RATINGS_SHAPE.1)?,
                delta: get.or("instance.delta", 5.0)?,
            },
            _ => InstanceSpec::SyntheticCompletion {
                rows: get.or("instance.rows", 60)?,
                cols: get.or("instance.cols", 40)?,
                rank: get.or("instance.rank", 3)?,
                density: get.or("instance.density", 0.25)?,
                noise: get.or("instance.noise", 0.1)?,
                seed: get.or("instance.seed", 42)?,
                delta: get.or("instance.delta", 5.0)?,
            },
        };

        let g_opt = match map.get("run.g_opt").map(String::as_str).unwrap_or("auto") {
            "auto" => GOptSource::Auto,
            "estimate" => GOptSource::Estimate,
            "none" => GOptSource::None,
            other => GOptSource::Value(other.parse().map_err(|_| HarnessError::BadValue {
                key: "run.g_opt".into(),
                message: format!("expected auto, estimate, none or a number, found '{other}'"),
            })?),
        };
        let run = RunSpec {
            max_iters: get.or("run.max_iters", 1000)?,
            time_limit_s: get.opt("run.time_limit_s")?,
            record_every: get.or("run.record_every", 1)?,
            g_opt,
            g_opt_max_iters: get.or("run.g_opt_max_iters", 20_000)?,
            jobs: get.or("run.jobs", 1)?,
        };
        if run.record_every == 0 || run.jobs == 0 {
            return Err(HarnessError::BadValue {
                key: "run.record_every / run.jobs".into(),
                message: "must be at least 1".into(),
            });
        }

        Ok(Config {
            solvers,
            schedule,
            irpg_step,
            cgbio,
            bisg,
            instance,
            instance_name: map.get("instance.name").cloned(),
            run,
            entries: raw.into_iter().map(|(_, k, v)| (k, v)).collect(),
        })
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
            line: k + 1,
            message: format!("expected key = value, found '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.contains('.') {
            return Err(HarnessError::Config {
                line: k + 1,
                message: format!("key '{key}' has no namespace"),
            });
        }
        out.push((k + 1, key.to_string(), value.to_string()));
    }
    Ok(out)
}

struct Getter<'a>(&'a BTreeMap<String, String>);

impl Getter<'_> {
    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| HarnessError::BadValue {
                    key: key.into(),
                    message: format!("cannot parse '{v}'"),
                })
            })
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.0.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| HarnessError::BadValue {
                    key: key.into(),
                    message: format!("cannot parse '{s}'"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}
