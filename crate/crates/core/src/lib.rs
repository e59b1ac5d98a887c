//! Optimal sequential search over a continuum of heterogeneous projects.
//!
//! A searcher looks for a single innovation hidden, with prior probability
//! `p`, at a uniformly distributed project in `[0, 1)`. Examining the set
//! `S` in one period costs `∫_S c(j) dj` with `c` increasing and unbounded;
//! finding the innovation pays `v`, and the future is discounted by `δ`.
//!
//! - [`model`]: the instance, beliefs and closed-form boundaries.
//! - [`solver`]: value iteration and backward induction on the frontier.
//! - [`oracle`]: exhaustive enumeration of a finite slot-and-period analog.
//! - [`simulate`]: Monte Carlo replay of search paths.

pub mod error;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod roots;
pub mod simulate;
pub mod solver;

pub use error::{Result, SearchError};
pub use grid::{FrontierGrid, Refinement};
pub use model::{CostFamily, CostModel, Frontier, ModelParams};
pub use oracle::{
    best_assignment, compare_with_continuous, evaluate_assignment, evaluate_recursive, structure_check,
    Assignment, ContinuousComparison, DiscreteInstance, EnumerationResult, StructureReport,
    DEFAULT_BUDGET,
};
pub use simulate::{
    active_probability_analytic, simulate_batch, simulate_path, AggregateStats, PathRecord, SimConfig,
};
pub use solver::{
    activity_threshold, backward_induction, bellman_rhs, classify_increments, continuation_inequality_check,
    euler_residual, euler_residual_at, first_order_residual, frontier_sequence, value_iteration,
    Adaptation, ContinuationCheck, FrontierPath, IncrementStatus, SolverConfig, TruncatedSolution, ValueSolution,
};
