//! Projection-free solvers for simple convex bilevel problems
//!
//! ```text
//! minimize f(x)  subject to  x ∈ argmin_{z ∈ X} g(z)
//! ```
//!
//! The main method is the iteratively regularized conditional gradient
//! ([`ircg::solve`]), which only needs a linear minimization oracle over `X`.
//! Reference solvers live in [`baselines`], nuclear-norm oracles in
//! [`oracles`], and shipped instances in [`problems`].

pub mod baselines;
pub mod certificates;
mod driver;
pub mod error;
pub mod ircg;
pub mod numerics;
pub mod oracles;
pub mod point;
pub mod problem;
pub mod problems;
pub mod schedule;
pub mod trace;

pub use error::{Error, Result};
pub use point::{Layout, Point};
pub use problem::{BilevelProblem, Constants, Domain, InstanceMetadata, Known, Provenance};
pub use schedule::{PowerSchedule, StepRule};
