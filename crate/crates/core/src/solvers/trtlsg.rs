use std::time::Instant;

use super::{record_eval, Algorithm, SolveReport, SolveStatus, SolverConfig, StoppingMode, TraceEvent};
use crate::bounds;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::trs::{eval_g, GEvaluation};

/// `G′` values at or below this count as non-positive.
const DERIVATIVE_ZERO: f64 = 1e-14;

/// Bisection on the sign of `G′(α)`.
///
/// Converges to a stationary point of `G`, which is the global minimizer
/// only when `G` is unimodal on the starting interval. `lb_star` is the
/// lower bound from a prior [`btd_solve`](super::btd_solve) run and is
/// required in [`StoppingMode::CertifiedGap`].
pub fn trtlsg_solve(
    problem: &ProblemInstance,
    config: &SolverConfig,
    lb_star: Option<f64>,
) -> Result<SolveReport> {
    config.validate()?;
    if config.stopping_mode == StoppingMode::CertifiedGap && lb_star.is_none() {
        return Err(Error::InvalidArgument(
            "certified-gap stopping needs a lower bound from a prior global solve".into(),
        ));
    }
    let start = Instant::now();
    if problem.b_is_zero() {
        return Ok(SolveReport::trivial(Algorithm::Trtlsg, problem.n(), start.elapsed()));
    }

    let bounds = bounds::bound_report(problem, config.epsilon)?;
    if !bounds.assumption_holds {
        return Err(Error::AssumptionViolated {
            l1: bounds.l1.unwrap_or(f64::NAN),
            l2: bounds.l2.unwrap_or(f64::NAN),
        });
    }
    let (mut lo, mut hi) = if config.use_improved_bounds {
        (bounds.alpha_min, bounds.alpha_max)
    } else {
        (1.0 + config.epsilon1, bounds.alpha_max_beck)
    };
    let interval = (lo, hi);

    let mut trace = Vec::new();
    let mut k = 0usize;
    let mut hi_eval: Option<GEvaluation> = None;
    let mut status = SolveStatus::Converged;

    loop {
        if let (StoppingMode::CertifiedGap, Some(e), Some(lb)) = (config.stopping_mode, &hi_eval, lb_star) {
            if e.g_value <= lb + config.epsilon {
                break;
            }
        }
        if (hi - lo).abs() <= config.epsilon2 {
            break;
        }
        if k >= config.max_iterations {
            status = SolveStatus::IterationCap;
            break;
        }
        let mid = 0.5 * (lo + hi);
        let e = eval_g(problem, mid, config.trs_tol)?;
        k += 1;
        record_eval(&mut trace, k, &e);
        let derivative = e.g_deriv.unwrap_or(0.0);
        if derivative > DERIVATIVE_ZERO {
            hi = mid;
            hi_eval = Some(e);
        } else {
            lo = mid;
        }
        trace.push(TraceEvent::Bisection { alpha: mid, derivative, alpha_lo: lo, alpha_hi: hi });
    }

    // The output point is x(α_max).
    let out = match hi_eval {
        Some(e) if e.alpha == hi => e,
        _ => {
            let e = eval_g(problem, hi, config.trs_tol)?;
            k += 1;
            record_eval(&mut trace, k, &e);
            e
        }
    };

    Ok(SolveReport {
        algorithm: Algorithm::Trtlsg,
        status,
        alpha_star: out.alpha,
        objective: out.g_value,
        x_star: out.x,
        lower_bound: lb_star,
        certified_gap: lb_star.map(|lb| out.g_value - lb),
        iterations: k,
        wall_time: start.elapsed(),
        search_interval: interval,
        bound_report: Some(bounds),
        trace,
    })
}
