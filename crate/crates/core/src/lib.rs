//! Global solver for Tikhonov-regularized total least squares.
//!
//! The problem
//!
//! ```text
//! min_x  ‖Ax − b‖² / (‖x‖² + 1) + ρ‖Lx‖²
//! ```
//!
//! is rewritten as the scalar problem `min_{α ≥ 1} G(α)`, where `G(α)` is
//! the minimum of `xᵀQ_αx − 2f_αᵀx + ‖b‖²/α` over the sphere `‖x‖² = α − 1`
//! (a trust-region subproblem). Closed-form bounds confine the optimal `α`
//! to a bounded interval, and a branch-and-bound search driven by a cheap
//! underestimator of `G` finds a certified global ε-minimizer.
//!
//! ```
//! use rtls::{btd_solve, problems::bimodal_example, SolverConfig};
//!
//! let report = btd_solve(&bimodal_example(), &SolverConfig::default()).unwrap();
//! assert!((report.alpha_star - 1.63).abs() < 0.01);
//! assert!(report.certified_gap.unwrap() <= 1e-6);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod solvers;
pub mod trs;
pub mod underestimate;

pub use bounds::{bound_report, BoundReport, DegenerateCase};
pub use error::{Error, Result};
pub use problem::ProblemInstance;
pub use solvers::{
    btd_solve, grid_oracle, trtlsg_solve, Algorithm, SolveReport, SolveStatus, SolverConfig, StoppingMode,
    TraceEvent,
};
pub use trs::{eval_g, GEvaluation};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/reformulation.md")]
    mod reformulation {}
    #[doc = include_str!("../../../book/src/trs.md")]
    mod trs {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/underestimator.md")]
    mod underestimator {}
    #[doc = include_str!("../../../book/src/btd.md")]
    mod btd {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
