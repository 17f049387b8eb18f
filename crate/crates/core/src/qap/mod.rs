//! Relaxed quadratic assignment restricted to a sparsity pattern: objective
//! and gradient, projection onto the constraint set, and the projected
//! gradient loop.
//!
//! Plans have one row per source vertex and one column per target vertex.
//! A permutation plan `P` (`P[s, pi(s)] = 1`) has zero objective exactly
//! when `S2 = P' S1 P` and `M2 = P' M1 P`.

mod objective;
mod pattern;
mod plan;
mod project;
mod solver;

pub use objective::QapProblem;
pub use pattern::SparsityPattern;
pub use plan::{extract_map, TransportPlan};
pub use project::{project, Projector, MARGINAL_TOL};
pub use solver::{
    iteration_log_csv, solve, write_iteration_log, IterRecord, SolveOutcome, SolverParams,
};
