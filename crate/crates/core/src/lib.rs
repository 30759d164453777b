//! Finite-difference solvers for one-dimensional diffusion equations with a
//! weighted (generalized) Caputo derivative in time,
//!
//! ```text
//! ∂^{α,λ}_{0t} u = ∂_x(k(x,t) ∂_x u) − q(x,t) u + f(x,t),   0 < x < l, 0 < t ≤ T,
//! ```
//!
//! where the memory kernel `(t−η)^{−α}` carries a weight `λ(t−η)`.
//!
//! The time derivative is discretized at the offset points `t_{j+σ}`,
//! `σ = 1 − α/2`, with second-order accuracy in `τ`. Two spatial schemes sit on
//! top of it: a standard three-point scheme (order 2 in `h`) and a compact
//! scheme (order 4 in `h`) for coefficients that depend on `t` only.
//!
//! Runnable examples live in `examples/`:
//!
//! - `coefficients`: the `a`, `b`, `c` weights and their stable evaluation
//! - `operator_order`: the discrete derivative against a quadrature oracle
//! - `second_order_scheme`: one solve of the built-in problem with exact solution
//! - `compact_scheme`: the compact scheme on a time-only-coefficient problem
//! - `convergence_table`: a refinement study rendered as CSV and Markdown
//! - `custom_problem`: a problem given as expression strings
//! - `verify_properties`: the coefficient and energy inequality suites

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod coefficients;
pub mod compact;
pub mod error;
pub mod expr;
pub mod operator;
pub mod problems;
pub mod properties;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod tridiag;
pub mod weights;

pub use analysis::{
    run_study, stability_audit, ConvergenceReport, Coupling, Drive, StabilityReport,
};
pub use coefficients::{c_coeffs, CoefficientSource, CoefficientTable, PowerCoefficients};
pub use compact::solve_compact;
pub use error::{Error, Result};
pub use operator::{apply_discrete, order_study, reference_derivative, SmoothFunction, TimeSeries};
pub use problems::{load_problem, make_test1, make_test2, ProblemConfig, ProblemSpec};
pub use solver::{solve, solve_scheme, Scheme, SolutionHistory, SpatialGrid};
pub use tridiag::{thomas_solve, TridiagonalSystem};
pub use weights::{FractionalOrder, WeightFunction};

pub(crate) fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
