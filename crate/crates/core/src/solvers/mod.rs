//! Global and local solvers for the one-dimensional reformulation
//! `min_{α ≥ 1} G(α)`.
//!
//! * [`btd_solve`]: branch-and-bound with the two-point underestimator and
//!   ω-subdivision; returns a certified global ε-approximation.
//! * [`trtlsg_solve`]: bisection on the sign of `G′`; fast but may stop at a
//!   local minimizer when `G` is not unimodal.
//! * [`grid_oracle`]: dense log-grid scan with golden-section polish, used
//!   to cross-check the other two.

mod btd;
mod grid;
mod trtlsg;

use std::time::Duration;

use nalgebra::DVector;
use serde::Serialize;

pub use btd::{btd_solve, SearchState};
pub use grid::{grid_oracle, log_grid};
pub use trtlsg::trtlsg_solve;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::trs;

/// When the bisection baseline stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingMode {
    /// `|α_max − α_min| ≤ ε₂`.
    IntervalWidth,
    /// `G(α_max) ≤ LB* + ε`, with `LB*` from a prior branch-and-bound run.
    /// The width test stays active as a fallback.
    CertifiedGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Global tolerance ε on the objective.
    pub epsilon: f64,
    /// Offset of the trivial lower end `1 + ε₁` (bisection, original bounds).
    pub epsilon1: f64,
    /// Interval-width tolerance ε₂ of the bisection.
    pub epsilon2: f64,
    /// Cap on `G` evaluations.
    pub max_iterations: usize,
    pub stopping_mode: StoppingMode,
    /// Bisection starts from the sharper interval instead of `[1 + ε₁, Beck bound]`.
    pub use_improved_bounds: bool,
    /// KKT tolerance for each subproblem solve.
    pub trs_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            epsilon1: 1e-1,
            epsilon2: 1e-6,
            max_iterations: 1_000_000,
            stopping_mode: StoppingMode::IntervalWidth,
            use_improved_bounds: true,
            trs_tol: trs::DEFAULT_TOL,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("epsilon1", self.epsilon1)?;
        positive("epsilon2", self.epsilon2)?;
        positive("trs_tol", self.trs_tol)?;
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Btd,
    Trtlsg,
    GridOracle,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Btd => "btd",
            Algorithm::Trtlsg => "trtlsg",
            Algorithm::GridOracle => "grid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Minimum known exactly (`b = 0`, or no interior split on the root interval).
    Exact,
    /// Normal termination.
    Converged,
    /// Stopped at `max_iterations`; the incumbent is returned as is.
    IterationCap,
}

/// Append-only record of what a solver did.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Evaluated {
        k: usize,
        alpha: f64,
        g_value: f64,
        lambda: f64,
        hard_case: bool,
    },
    Incumbent {
        alpha: f64,
        ub: f64,
    },
    NodeCreated {
        alpha_lo: f64,
        alpha_hi: f64,
        lb: f64,
        split_point: Option<f64>,
    },
    NodePruned {
        alpha_lo: f64,
        alpha_hi: f64,
        lb: f64,
        ub: f64,
    },
    NodeSplit {
        alpha_lo: f64,
        alpha_hi: f64,
        lb: f64,
        at: f64,
    },
    /// Branch-and-bound bookkeeping after each node selection.
    Iteration {
        k: usize,
        ub: f64,
        lb_star: f64,
    },
    Bisection {
        alpha: f64,
        derivative: f64,
        alpha_lo: f64,
        alpha_hi: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub status: SolveStatus,
    pub alpha_star: f64,
    pub x_star: DVector<f64>,
    /// `G(α*)`, equal to the original objective at `x*`.
    pub objective: f64,
    /// Certified lower bound on the optimal value, when one is available.
    pub lower_bound: Option<f64>,
    /// `objective − lower_bound`.
    pub certified_gap: Option<f64>,
    /// Number of `G` evaluations (subproblem solves).
    pub iterations: usize,
    pub wall_time: Duration,
    /// Interval actually searched.
    pub search_interval: (f64, f64),
    pub bound_report: Option<BoundReport>,
    pub trace: Vec<TraceEvent>,
}

impl SolveReport {
    fn trivial(algorithm: Algorithm, n: usize, wall_time: Duration) -> Self {
        Self {
            algorithm,
            status: SolveStatus::Exact,
            alpha_star: 1.0,
            x_star: DVector::zeros(n),
            objective: 0.0,
            lower_bound: Some(0.0),
            certified_gap: Some(0.0),
            iterations: 0,
            wall_time,
            search_interval: (1.0, 1.0),
            bound_report: None,
            trace: Vec::new(),
        }
    }
}

pub(crate) fn record_eval(trace: &mut Vec<TraceEvent>, k: usize, e: &trs::GEvaluation) {
    trace.push(TraceEvent::Evaluated {
        k,
        alpha: e.alpha,
        g_value: e.g_value,
        lambda: e.lambda,
        hard_case: e.hard_case,
    });
}
