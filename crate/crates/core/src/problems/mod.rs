//! Shipped bilevel instances and data ingestion.

mod ball_quadratic;
mod custom;
mod data;
mod least_norm;
mod matrix_completion;

pub use ball_quadratic::BallQuadraticProblem;
pub use custom::CustomProblem;
pub use data::{
    gen_synthetic_completion, load_ratings, parse_ratings, Observations, RATINGS_SHAPE,
};
pub use least_norm::LeastNormProblem;
pub use matrix_completion::MatrixCompletionProblem;
