mod common;

use common::TOL;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rtls::{btd_solve, eval_g, SolverConfig};

proptest! {
    #![proptest_config(common::config(200))]

    #[test]
    fn kkt_feasibility_and_multiplier((p, r) in common::instance(6), t in 0.0f64..1.0) {
        common::check_kkt(&p, &r, t)?;
    }
}

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn derivative_matches_central_difference((p, r) in common::instance(5), t in 0.0f64..1.0) {
        common::check_derivative(&p, &r, t)?;
    }
}

proptest! {
    #![proptest_config(common::config(10))]

    #[test]
    fn underestimator_dominates_and_is_tight(
        (p, r) in common::instance(5),
        cuts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 5),
    ) {
        common::check_underestimator(&p, &r, &cuts)?;
    }

    #[test]
    fn certificate_holds_on_dense_sweep((p, r) in common::instance(4)) {
        common::check_certificate(&p, &r)?;
    }

    #[test]
    fn solves_are_deterministic((p, _r) in common::instance(5)) {
        let a = btd_solve(&p, &SolverConfig::default()).unwrap();
        let b = btd_solve(&p, &SolverConfig::default()).unwrap();
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.x_star, b.x_star);
    }

    #[test]
    fn bound_ingredients((p, r) in common::instance(6)) {
        prop_assert!(r.kappa1.unwrap() < p.btb());
        for mu in [p.rho(), 1.0, 10.0] {
            let m = p.ata() + p.ltl() * mu;
            prop_assert!(rtls::linalg::lambda_min(&m).unwrap() > 0.0);
        }
        if r.alpha_min > 1.0 {
            let u = rtls::bounds::lambda_bound_u(&p, r.alpha_min).unwrap();
            for a in rtls::solvers::log_grid(r.alpha_min, r.alpha_max, 50) {
                let e = eval_g(&p, a, TOL).unwrap();
                prop_assert!(e.lambda.abs() <= u + 1e-8, "|lambda({a})| = {} > {u}", e.lambda.abs());
            }
        }
    }
}

proptest! {
    #![proptest_config(common::config(20))]

    #[test]
    fn btd_matches_grid_oracle((p, r) in common::instance(6)) {
        common::check_grid_oracle(&p, &r)?;
    }

    #[test]
    fn atb_zero_routes_through_alpha_one(p in common::atb_zero_instance()) {
        common::check_atb_zero(&p)?;
    }
}

proptest! {
    #![proptest_config(common::config(40))]

    #[test]
    fn btd_global_and_monotone((p, r) in common::instance(6), eps_exp in 4i32..=8) {
        common::check_btd_ordering(&p, &r, 10f64.powi(-eps_exp))?;
    }
}

#[test]
fn b_zero_needs_no_subproblem() {
    common::check_b_zero().unwrap();
}

/// Polar-grid oracle for `n = 2`: minimize on the circle `‖x‖² = α − 1`.
fn polar_min(p: &rtls::ProblemInstance, alpha: f64) -> f64 {
    let r = (alpha - 1.0).sqrt();
    let f = |theta: f64| {
        let x = DVector::from_vec(vec![r * theta.cos(), r * theta.sin()]);
        p.residual_sq(&x) / alpha + p.rho() * p.seminorm_sq(&x)
    };
    let n = 20_000;
    let step = std::f64::consts::TAU / n as f64;
    let (mut best, mut at) = (f64::INFINITY, 0.0);
    for i in 0..n {
        let v = f(i as f64 * step);
        if v < best {
            best = v;
            at = i as f64 * step;
        }
    }
    // Golden-section refinement around the best grid angle.
    let (mut a, mut b) = (at - step, at + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(f(0.5 * (a + b)))
}

proptest! {
    #![proptest_config(common::config(50))]

    #[test]
    fn two_dimensional_polar_oracle(
        a in prop::collection::vec(-1.0f64..1.0, 4),
        b in prop::collection::vec(-1.0f64..1.0, 2),
        l in prop::collection::vec(-1.0f64..1.0, 2),
        rho in 0.05f64..2.0,
        alpha in 1.01f64..50.0,
    ) {
        let p = rtls::ProblemInstance::new(
            DMatrix::from_row_slice(2, 2, &a),
            DVector::from_vec(b),
            DMatrix::from_row_slice(1, 2, &l),
            rho,
        );
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        let e = eval_g(&p, alpha, TOL).unwrap();
        let oracle = polar_min(&p, alpha);
        prop_assert!((e.g_value - oracle).abs() <= 1e-4, "{} vs {oracle}", e.g_value);
        prop_assert!(e.g_value <= oracle + 1e-10);
    }
}
