use std::time::Instant;

use super::{record_eval, Algorithm, SolveReport, SolveStatus};
use crate::bounds::{self, DegenerateCase};
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trs::{eval_g, GEvaluation};

const GOLDEN_REL_TOL: f64 = 1e-10;
const GOLDEN_MAX_ITER: usize = 200;

/// Brute-force reference minimizer of `G`.
///
/// Scans a log-spaced grid over `alpha_range` (default: the closed-form
/// search interval) and polishes the best point by golden-section search
/// between its grid neighbours. Meant for verification, not production.
pub fn grid_oracle(
    problem: &ProblemInstance,
    grid_points: usize,
    alpha_range: Option<(f64, f64)>,
    tol: f64,
) -> Result<SolveReport> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid oracle needs at least 2 points, got {grid_points}"
        )));
    }
    let start = Instant::now();
    if problem.b_is_zero() {
        return Ok(SolveReport::trivial(Algorithm::GridOracle, problem.n(), start.elapsed()));
    }

    let mut include_one = false;
    let (lo, hi, report) = match alpha_range {
        Some((lo, hi)) => {
            if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid alpha range [{lo}, {hi}]")));
            }
            (lo, hi, None)
        }
        None => {
            let r = bounds::bound_report(problem, 1e-6)?;
            if !r.assumption_holds {
                return Err(Error::AssumptionViolated {
                    l1: r.l1.unwrap_or(f64::NAN),
                    l2: r.l2.unwrap_or(f64::NAN),
                });
            }
            include_one = r.degenerate_case == DegenerateCase::AtbZero;
            (r.alpha_min, r.alpha_max.max(r.alpha_min), Some(r))
        }
    };

    let mut trace = Vec::new();
    let mut k = 0usize;
    let mut evaluate = |alpha: f64| -> Result<GEvaluation> {
        let e = eval_g(problem, alpha, tol)?;
        k += 1;
        record_eval(&mut trace, k, &e);
        Ok(e)
    };

    let grid = log_grid(lo, hi, grid_points);
    let mut best: Option<GEvaluation> = None;
    let mut best_idx = 0;
    for (i, &a) in grid.iter().enumerate() {
        let e = evaluate(a)?;
        if best.as_ref().is_none_or(|b| e.g_value < b.g_value) {
            best_idx = i;
            best = Some(e);
        }
    }
    let mut best = best.expect("grid is non-empty");

    if grid.len() >= 3 {
        let mut a = grid[best_idx.saturating_sub(1)];
        let mut b = grid[(best_idx + 1).min(grid.len() - 1)];
        let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut ec = evaluate(c)?;
        let mut ed = evaluate(d)?;
        for _ in 0..GOLDEN_MAX_ITER {
            if (b - a) <= GOLDEN_REL_TOL * b {
                break;
            }
            if ec.g_value < ed.g_value {
                b = d;
                d = c;
                ed = ec;
                c = b - inv_phi * (b - a);
                ec = evaluate(c)?;
            } else {
                a = c;
                c = d;
                ec = ed;
                d = a + inv_phi * (b - a);
                ed = evaluate(d)?;
            }
        }
        for e in [ec, ed] {
            if e.g_value < best.g_value {
                best = e;
            }
        }
    }

    if include_one && problem.btb() < best.g_value {
        best = evaluate(1.0)?;
    }

    Ok(SolveReport {
        algorithm: Algorithm::GridOracle,
        status: SolveStatus::Converged,
        alpha_star: best.alpha,
        objective: best.g_value,
        x_star: best.x,
        lower_bound: None,
        certified_gap: None,
        iterations: k,
        wall_time: start.elapsed(),
        search_interval: (lo, hi),
        bound_report: report,
        trace,
    })
}

/// `n` points from `lo` to `hi`, equally spaced in `log α`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi == lo {
        return vec![lo];
    }
    let (ll, lh) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (ll + (lh - ll) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
