//! Two-point underestimator of `G` on an interval.
//!
//! From the endpoint evaluations `(αᵢ, λᵢ, Gᵢ)` and `(αⱼ, λⱼ, Gⱼ)`,
//! `αᵢ < αⱼ`, the function
//!
//! ```text
//! G̲(α) = c₁α + c₂/α + c₃
//! c₁ = (αⱼλⱼ − αᵢλᵢ) / (αⱼ − αᵢ)
//! c₂ = αᵢαⱼ (c₁ − (Gⱼ − Gᵢ)/(αⱼ − αᵢ))
//! c₃ = (αⱼGⱼ − αᵢGᵢ)/(αⱼ − αᵢ) − c₁(αⱼ + αᵢ)
//! ```
//!
//! bounds `G` from below on `[αᵢ, αⱼ]` and matches it at both endpoints.
//! It comes from Lagrangian duality of the sphere-constrained subproblem:
//! the multipliers at the endpoints give two affine minorants of the
//! inner Lagrangian, and the resulting linear program solves in closed form.
//!
//! If `c₁ > 0`, `c₂ > 0` and `α̃ = √(c₂/c₁)` lies strictly inside the
//! interval, the minimum of `G̲` is `2√(c₁c₂) + c₃`, attained at `α̃`.
//! Otherwise the minimum of `G` itself over the interval is the smaller
//! endpoint value and the interval needs no further work.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trs::GEvaluation;

/// Smallest admissible relative width `(αⱼ − αᵢ)/αⱼ`.
pub const MIN_RELATIVE_WIDTH: f64 = 1e-12;

/// Relative margin keeping `α̃` away from the endpoints.
pub const INTERIOR_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Underestimator {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
}

impl Underestimator {
    /// Build from raw endpoint data `(α, λ(α), G(α))`.
    pub fn from_endpoints(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> Result<Self> {
        let (a0, lam0, g0) = lo;
        let (a1, lam1, g1) = hi;
        let width = a1 - a0;
        if !(width > MIN_RELATIVE_WIDTH * a1.abs()) {
            return Err(Error::InvalidArgument(format!("interval [{a0}, {a1}] is empty or too narrow")));
        }
        let c1 = (a1 * lam1 - a0 * lam0) / width;
        let c2 = a0 * a1 * (c1 - (g1 - g0) / width);
        let c3 = (a1 * g1 - a0 * g0) / width - c1 * (a1 + a0);
        Ok(Self { c1, c2, c3, alpha_lo: a0, alpha_hi: a1 })
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        self.c1 * alpha + self.c2 / alpha + self.c3
    }

    pub fn derivative(&self, alpha: f64) -> f64 {
        self.c1 - self.c2 / (alpha * alpha)
    }
}

pub fn fit_underestimator(eval_lo: &GEvaluation, eval_hi: &GEvaluation) -> Result<Underestimator> {
    Underestimator::from_endpoints(
        (eval_lo.alpha, eval_lo.lambda, eval_lo.g_value),
        (eval_hi.alpha, eval_hi.lambda, eval_hi.g_value),
    )
}

/// Lower bound over an interval and, when the underestimator has an
/// interior minimizer, the point to branch at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalBound {
    pub lb: f64,
    pub split_point: Option<f64>,
}

pub fn interval_lower_bound(u: &Underestimator) -> IntervalBound {
    let g_lo = u.eval(u.alpha_lo);
    let g_hi = u.eval(u.alpha_hi);
    let endpoint_min = g_lo.min(g_hi);

    let guard = 1e-14 * (1.0 + u.c3.abs());
    if u.c1 > guard && u.c2 > guard {
        let tilde = (u.c2 / u.c1).sqrt();
        let margin = INTERIOR_MARGIN * (u.alpha_hi - u.alpha_lo);
        if tilde > u.alpha_lo + margin && tilde < u.alpha_hi - margin {
            let lb = 2.0 * (u.c1 * u.c2).sqrt() + u.c3;
            return IntervalBound { lb: lb.min(endpoint_min), split_point: Some(tilde) };
        }
    }
    IntervalBound { lb: endpoint_min, split_point: None }
}

/// A branch-and-bound node: an interval with both endpoint evaluations.
#[derive(Debug, Clone)]
pub struct IntervalNode {
    pub lb: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub eval_lo: Arc<GEvaluation>,
    pub eval_hi: Arc<GEvaluation>,
    pub split_point: Option<f64>,
    pub underestimator: Underestimator,
}

impl IntervalNode {
    pub fn new(eval_lo: Arc<GEvaluation>, eval_hi: Arc<GEvaluation>) -> Result<Self> {
        let u = fit_underestimator(&eval_lo, &eval_hi)?;
        let bound = interval_lower_bound(&u);
        // Exact endpoint values, not the reconstructed ones.
        let lb = bound.lb.min(eval_lo.g_value).min(eval_hi.g_value);
        Ok(Self {
            lb,
            alpha_lo: eval_lo.alpha,
            alpha_hi: eval_hi.alpha,
            eval_lo,
            eval_hi,
            split_point: bound.split_point,
            underestimator: u,
        })
    }

    /// The interval's exact minimum is already known (no interior split).
    pub fn is_exhausted(&self) -> bool {
        self.split_point.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(c1: f64, c2: f64, c3: f64, lo: f64, hi: f64) -> Underestimator {
        Underestimator { c1, c2, c3, alpha_lo: lo, alpha_hi: hi }
    }

    #[test]
    fn interior_minimizer() {
        let b = interval_lower_bound(&u(1.0, 4.0, 0.0, 1.0, 10.0));
        assert_eq!(b.lb, 4.0);
        assert_eq!(b.split_point, Some(2.0));
    }

    #[test]
    fn both_negative_uses_endpoints() {
        let b = interval_lower_bound(&u(-1.0, -1.0, 0.0, 1.0, 2.0));
        assert_eq!(b.lb, -2.5);
        assert_eq!(b.split_point, None);
    }

    #[test]
    fn minimizer_outside_interval() {
        // α̃ = 2 lies right of [0.5, 1.5]: decreasing, minimum at the right end.
        let e = u(1.0, 4.0, 0.0, 0.5, 1.5);
        let b = interval_lower_bound(&e);
        assert_eq!(b.split_point, None);
        assert_eq!(b.lb, e.eval(1.5));
        // α̃ = 2 lies left of [3, 5]: increasing, minimum at the left end.
        let e = u(1.0, 4.0, 0.0, 3.0, 5.0);
        assert_eq!(interval_lower_bound(&e).lb, e.eval(3.0));
    }

    #[test]
    fn split_at_endpoint_is_rejected() {
        let b = interval_lower_bound(&u(1.0, 4.0, 0.0, 2.0, 5.0));
        assert_eq!(b.split_point, None);
    }

    #[test]
    fn endpoint_reproduction() {
        let e = Underestimator::from_endpoints((1.5, 0.3, 0.7), (4.0, -0.2, 0.9)).unwrap();
        assert!((e.eval(1.5) - 0.7).abs() < 1e-14);
        assert!((e.eval(4.0) - 0.9).abs() < 1e-14);
    }

    /// With λ constant and `G` affine in α, substituting into the closed
    /// form by hand gives `c₁ = λ̄`, `c₂ = αᵢαⱼ(λ̄ − s)` and
    /// `c₃ = G(0) − (λ̄ − s)(αᵢ + αⱼ)`, where `s` is the slope of `G`.
    #[test]
    fn constant_multiplier_substitution() {
        let (lam, g0, s) = (0.25, 1.0, 0.1);
        let g = |a: f64| g0 + s * a;
        let (a0, a1) = (2.0, 6.0);
        let e = Underestimator::from_endpoints((a0, lam, g(a0)), (a1, lam, g(a1))).unwrap();
        assert!((e.c1 - lam).abs() < 1e-15);
        assert!((e.c2 - a0 * a1 * (lam - s)).abs() < 1e-14);
        assert!((e.c3 - (g0 - (lam - s) * (a0 + a1))).abs() < 1e-14);
    }

    #[test]
    fn rejects_coincident_endpoints() {
        assert!(Underestimator::from_endpoints((2.0, 0.0, 1.0), (2.0, 0.0, 1.0)).is_err());
        assert!(Underestimator::from_endpoints((3.0, 0.0, 1.0), (2.0, 0.0, 1.0)).is_err());
    }
}
