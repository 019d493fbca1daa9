#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use rtls::bounds::{self, BoundReport, DegenerateCase};
use rtls::linalg;
use rtls::solvers::log_grid;
use rtls::trs::{self, build_trs};
use rtls::underestimate::{fit_underestimator, interval_lower_bound, IntervalNode};
use rtls::{
    btd_solve, eval_g, grid_oracle, trtlsg_solve, ProblemInstance, SolveStatus, SolverConfig, StoppingMode,
    TraceEvent,
};

pub const TOL: f64 = trs::DEFAULT_TOL;

pub type CheckResult = Result<(), TestCaseError>;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x5eed_1234),
        max_global_rejects: 100_000,
        ..Config::default()
    }
}

/// Run `check` on `cases` draws of `strategy`; `Err` carries the failure.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> CheckResult,
) -> Result<(), String> {
    TestRunner::new(config(cases)).run(&strategy, check).map_err(|e| e.to_string())
}

pub fn log_uniform(lo: f64, hi: f64, t: f64) -> f64 {
    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
}

/// Small dense instance with `Aᵀb ≠ 0` and the attainment assumption holding.
pub fn instance(max_n: usize) -> impl Strategy<Value = (ProblemInstance, BoundReport)> {
    (2..=max_n, 0usize..=3)
        .prop_flat_map(|(n, extra)| {
            let m = n + extra;
            (Just((m, n)), 1..=n)
        })
        .prop_flat_map(|((m, n), k)| {
            (
                Just((m, n, k)),
                prop::collection::vec(-1.0f64..1.0, m * n),
                prop::collection::vec(-1.0f64..1.0, m),
                prop::collection::vec(-1.0f64..1.0, k * n),
                0.05f64..2.0,
            )
        })
        .prop_filter_map("assumption or rank", |((m, n, k), a, b, l, rho)| {
            let p = ProblemInstance::new(
                DMatrix::from_row_slice(m, n, &a),
                DVector::from_vec(b),
                DMatrix::from_row_slice(k, n, &l),
                rho,
            )
            .ok()?;
            if p.b_is_zero() || p.atb_is_zero() {
                return None;
            }
            let r = bounds::bound_report(&p, 1e-6).ok()?;
            // Keep the search interval moderate so grid sweeps stay meaningful.
            (r.assumption_holds && r.alpha_max < 1e7).then_some((p, r))
        })
}

/// `(A, b, ρ)` for an instance with `Aᵀb = 0` and `L = I`.
pub fn atb_zero_instance() -> impl Strategy<Value = ProblemInstance> {
    (prop::collection::vec(-1.0f64..1.0, 12), prop::collection::vec(-1.0f64..1.0, 4), 0.1f64..2.0)
        .prop_filter_map("Aᵀb not negligible", |(a, b, rho)| {
            let b = DVector::from_vec(b);
            if b.norm() < 0.1 {
                return None;
            }
            // Project the columns of A onto the orthogonal complement of b.
            let proj = DMatrix::identity(4, 4) - &b * b.transpose() / b.norm_squared();
            let a = proj * DMatrix::from_row_slice(4, 3, &a);
            let p = ProblemInstance::new(a, b, DMatrix::identity(3, 3), rho).ok()?;
            p.atb_is_zero().then_some(p)
        })
}

pub fn check_kkt(p: &ProblemInstance, r: &BoundReport, t: f64) -> CheckResult {
    let alpha = log_uniform(1.0 + 1e-6, r.alpha_max, t);
    let e = eval_g(p, alpha, TOL).map_err(fail)?;
    let trs = build_trs(p, alpha).map_err(fail)?;
    let shifted = &trs.q - DMatrix::identity(p.n(), p.n()) * e.lambda;
    let residual = (&shifted * &e.x - &trs.f).norm();
    prop_assert!(residual <= TOL * (1.0 + trs.f.norm()), "residual {residual:e} at alpha {alpha}");
    prop_assert!((e.x.norm_squared() - (alpha - 1.0)).abs() <= TOL * alpha);
    let lmin = linalg::lambda_min(&trs.q).map_err(fail)?;
    prop_assert!(e.lambda <= lmin + TOL);

    let quadratic = e.x.dot(&(&trs.q * &e.x)) - 2.0 * trs.f.dot(&e.x) + p.btb() / alpha;
    prop_assert!((quadratic - e.g_value).abs() <= 1e-8 * (1.0 + e.g_value.abs()));
    Ok(())
}

/// Central difference of `G` with step `h`.
pub fn central_difference(p: &ProblemInstance, alpha: f64, h: f64) -> f64 {
    let g = |a: f64| eval_g(p, a, 1e-12).unwrap().g_value;
    (g(alpha + h) - g(alpha - h)) / (2.0 * h)
}

pub fn check_derivative(p: &ProblemInstance, r: &BoundReport, t: f64) -> CheckResult {
    let alpha = log_uniform(r.alpha_min, r.alpha_max, t);
    let e = eval_g(p, alpha, 1e-12).map_err(fail)?;
    let h = 1e-4 * (alpha - 1.0).min(1.0) * alpha.sqrt();
    let near_hard = [alpha - h, alpha, alpha + h]
        .iter()
        .any(|&a| eval_g(p, a, 1e-12).map(|e| e.hard_case).unwrap_or(true));
    prop_assume!(!near_hard);
    let fd = central_difference(p, alpha, h);
    let g = e.g_deriv.expect("alpha > 1");
    // Relative test with an absolute floor for near-stationary points.
    prop_assert!((fd - g).abs() <= 1e-4 * g.abs() + 1e-9, "alpha {alpha}: fd {fd:e} vs {g:e}");
    Ok(())
}

pub fn check_underestimator(p: &ProblemInstance, r: &BoundReport, cuts: &[(f64, f64)]) -> CheckResult {
    for &(s, t) in cuts {
        let (s, t) = if s < t { (s, t) } else { (t, s) };
        if t - s <= 1e-3 {
            continue;
        }
        let lo = log_uniform(r.alpha_min, r.alpha_max, s);
        let hi = log_uniform(r.alpha_min, r.alpha_max, t);
        let elo = eval_g(p, lo, TOL).map_err(fail)?;
        let ehi = eval_g(p, hi, TOL).map_err(fail)?;
        let u = fit_underestimator(&elo, &ehi).map_err(fail)?;
        prop_assert!((u.eval(lo) - elo.g_value).abs() <= 1e-8 * (1.0 + elo.g_value.abs()));
        prop_assert!((u.eval(hi) - ehi.g_value).abs() <= 1e-8 * (1.0 + ehi.g_value.abs()));
        for a in log_grid(lo, hi, 50) {
            let g = eval_g(p, a, TOL).map_err(fail)?.g_value;
            prop_assert!(u.eval(a) <= g + 1e-6, "alpha {a}: {} > {g}", u.eval(a));
        }
        let b = interval_lower_bound(&u);
        let node = IntervalNode::new(Arc::new(elo.clone()), Arc::new(ehi.clone())).map_err(fail)?;
        prop_assert!(node.lb <= elo.g_value.min(ehi.g_value));
        prop_assert_eq!(node.split_point, b.split_point);
        if let Some(split) = b.split_point {
            prop_assert!(u.c1 > 0.0 && u.c2 > 0.0);
            prop_assert!(split > lo && split < hi);
            prop_assert!(u.derivative(split).abs() <= 1e-10 * (1.0 + u.c1 + u.c2 / (split * split)));
        }
    }
    Ok(())
}

pub fn check_grid_oracle(p: &ProblemInstance, r: &BoundReport) -> CheckResult {
    let cfg = SolverConfig::default();
    let b = btd_solve(p, &cfg).map_err(fail)?;
    let g = grid_oracle(p, 2000, Some((r.alpha_min, r.alpha_max)), TOL).map_err(fail)?;
    prop_assert!(
        (b.objective - g.objective).abs() <= cfg.epsilon,
        "btd {} grid {}",
        b.objective,
        g.objective
    );
    prop_assert!(g.alpha_star >= r.alpha_min - 1e-6 && g.alpha_star <= r.alpha_max + 1e-6);
    prop_assert!(g.alpha_star <= r.alpha_max_beck + 1e-6);
    Ok(())
}

pub fn check_btd_ordering(p: &ProblemInstance, r: &BoundReport, epsilon: f64) -> CheckResult {
    let cfg = SolverConfig { epsilon, ..SolverConfig::default() };
    let b = btd_solve(p, &cfg).map_err(fail)?;
    prop_assert!(b.status != SolveStatus::IterationCap);

    for improved in [true, false] {
        let t =
            trtlsg_solve(p, &SolverConfig { use_improved_bounds: improved, ..cfg }, None).map_err(fail)?;
        prop_assert!(b.objective <= t.objective + epsilon);
    }
    let c = SolverConfig { stopping_mode: StoppingMode::CertifiedGap, ..cfg };
    let t = trtlsg_solve(p, &c, b.lower_bound).map_err(fail)?;
    prop_assert!(b.objective <= t.objective + epsilon);

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for ev in &b.trace {
        match *ev {
            TraceEvent::Incumbent { ub: u, .. } => {
                prop_assert!(u <= ub);
                ub = u;
            }
            TraceEvent::Iteration { ub: u, lb_star, .. } => {
                prop_assert!(u <= ub);
                prop_assert!(lb_star >= lb, "LB* decreased: {lb} -> {lb_star}");
                lb = lb_star;
            }
            _ => {}
        }
    }

    let lower = b.lower_bound.expect("btd certifies");
    prop_assert!(lower <= b.objective);
    prop_assert!(b.objective - lower <= epsilon * (1.0 + 1e-9));

    if r.alpha_min > 1.0 {
        let cap = bounds::iteration_bound(p, r.alpha_min, r.alpha_max, epsilon).map_err(fail)?;
        prop_assert!(b.iterations as u64 <= cap, "{} > {cap}", b.iterations);
    }
    Ok(())
}

pub fn check_b_zero() -> CheckResult {
    let p = ProblemInstance::new(
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.5, -1.0, 0.3, 0.7]),
        DVector::zeros(3),
        DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        0.5,
    )
    .map_err(fail)?;
    let cfg = SolverConfig::default();
    for r in [btd_solve(&p, &cfg).map_err(fail)?, trtlsg_solve(&p, &cfg, None).map_err(fail)?] {
        prop_assert_eq!(r.alpha_star, 1.0);
        prop_assert_eq!(r.iterations, 0);
        prop_assert_eq!(r.objective, 0.0);
        prop_assert_eq!(r.x_star, DVector::zeros(2));
        prop_assert_eq!(r.status, SolveStatus::Exact);
    }
    prop_assert_eq!(bounds::alpha_lower(&p, 1e-6).map_err(fail)?.case, DegenerateCase::BZero);
    Ok(())
}

pub fn check_atb_zero(p: &ProblemInstance) -> CheckResult {
    let cfg = SolverConfig::default();
    let r = bounds::bound_report(p, cfg.epsilon).map_err(fail)?;
    prop_assert_eq!(r.degenerate_case, DegenerateCase::AtbZero);
    let s = btd_solve(p, &cfg).map_err(fail)?;
    prop_assert!(s.objective <= p.btb());
    prop_assert!(s.lower_bound.expect("btd certifies") <= s.objective);
    let g = grid_oracle(p, 2000, None, TOL).map_err(fail)?;
    prop_assert!(s.objective <= g.objective + cfg.epsilon);
    Ok(())
}

fn fail(e: rtls::Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// `G(α) ≥ UB − ε` on a 500-point sweep of the search interval.
pub fn check_certificate(p: &ProblemInstance, r: &BoundReport) -> CheckResult {
    let b = btd_solve(p, &SolverConfig::default()).map_err(fail)?;
    for a in log_grid(r.alpha_min, r.alpha_max, 500) {
        let g = eval_g(p, a, TOL).map_err(fail)?.g_value;
        prop_assert!(g >= b.objective - 1e-6, "G({a}) = {g} < {}", b.objective);
    }
    Ok(())
}
