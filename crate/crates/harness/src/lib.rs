//! Configuration, trace files, rate fits, comparison tables and plots for
//! benchmarking the bilevel solvers in `bilevel-core`.

pub mod compare;
pub mod config;
pub mod error;
pub mod plot;
pub mod ratefit;
pub mod run;
pub mod selftest;
pub mod trace_io;

pub use config::{Config, GOptSource, InstanceSpec, RunSpec, SolverKind};
pub use error::{HarnessError, Result};
pub use ratefit::{rate_fit, RateFit};
