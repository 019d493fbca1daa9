//! L-curve selection of the regularization weight ρ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::solvers::{btd_solve, SolverConfig};

/// Floor applied before taking logarithms.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LCurvePoint {
    pub rho: f64,
    /// `‖Ax−b‖² / (‖x‖² + 1)`.
    pub residual: f64,
    /// `‖Lx‖²`.
    pub seminorm: f64,
    /// Signed three-point curvature in log-log coordinates; `None` at the ends.
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LCurve {
    pub rho: f64,
    pub curve: Vec<LCurvePoint>,
    /// Fewer than three grid points; `rho` is the middle grid value.
    pub degenerate: bool,
}

/// `n` log-spaced weights from `lo` to `hi`.
pub fn default_rho_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::solvers::log_grid(lo, hi, n)
}

/// Solve for every ρ in an ascending grid and pick the corner.
///
/// The corner is the grid point of largest signed Menger curvature of the
/// curve `(log residual, log seminorm)`.
pub fn lcurve_rho(base: &ProblemInstance, rho_grid: &[f64], config: &SolverConfig) -> Result<LCurve> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidArgument("rho grid is empty".into()));
    }
    if rho_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("rho grid entries must be positive and finite".into()));
    }
    if rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("rho grid must be strictly ascending".into()));
    }

    let mut curve = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let p = base.with_rho(rho)?;
        let r = btd_solve(&p, config)?;
        let x = &r.x_star;
        curve.push(LCurvePoint {
            rho,
            residual: p.residual_sq(x) / (x.norm_squared() + 1.0),
            seminorm: p.seminorm_sq(x),
            curvature: None,
        });
    }

    if curve.len() < 3 {
        let rho = rho_grid[rho_grid.len() / 2];
        log::warn!(
            "L-curve needs at least 3 grid points for curvature, got {}; returning rho = {rho}",
            curve.len()
        );
        return Ok(LCurve { rho, curve, degenerate: true });
    }

    let logs: Vec<(f64, f64)> =
        curve.iter().map(|c| (c.residual.max(LOG_FLOOR).ln(), c.seminorm.max(LOG_FLOOR).ln())).collect();
    let mut best = 1;
    let mut best_kappa = f64::NEG_INFINITY;
    for i in 1..curve.len() - 1 {
        let kappa = menger_curvature(logs[i - 1], logs[i], logs[i + 1]);
        curve[i].curvature = Some(kappa);
        if kappa > best_kappa {
            best_kappa = kappa;
            best = i;
        }
    }
    Ok(LCurve { rho: curve[best].rho, curve, degenerate: false })
}

/// Signed curvature of the circle through three points; positive for a
/// counter-clockwise turn, zero when two points coincide.
pub fn menger_curvature(p1: (f64, f64), p2: (f64, f64), p3: (f64, f64)) -> f64 {
    let cross = (p2.0 - p1.0) * (p3.1 - p1.1) - (p2.1 - p1.1) * (p3.0 - p1.0);
    let d = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let denom = d(p1, p2) * d(p2, p3) * d(p1, p3);
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}
