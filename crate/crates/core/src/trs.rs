//! Evaluation of the parametric function
//!
//! ```text
//! G(α) = min { ‖Ax − b‖²/α + ρ‖Lx‖²  :  ‖x‖² = α − 1 }
//!      = min { xᵀQ_α x − 2f_αᵀx + ‖b‖²/α  :  ‖x‖² = α − 1 }
//! Q_α  = AᵀA/α + ρLᵀL,   f_α = Aᵀb/α
//! ```
//!
//! Each evaluation is an equality-constrained trust-region subproblem. A
//! pair `(x, λ)` is a global minimizer iff
//! `(Q_α − λI)x = f_α`, `‖x‖² = α − 1` and `Q_α − λI ⪰ 0`.
//! The subproblem is solved from a full symmetric eigendecomposition of
//! `Q_α`, with the multiplier found as the root of the secular equation
//! below `λ_min(Q_α)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, canonical_sign};
use crate::problem::ProblemInstance;

/// Default KKT residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative size below which an eigencomponent of `f` counts as zero when
/// testing for the hard case.
pub const HARD_CASE_THRESHOLD: f64 = 1e-12;

const SECULAR_MAX_ITER: usize = 500;

/// Objective forms whose disagreement beyond this (relative) is a solver bug.
const CONSISTENCY_TOL: f64 = 1e-6;

/// A sphere-constrained quadratic: minimize `xᵀQx − 2fᵀx` over `‖x‖² = radius_sq`.
#[derive(Debug, Clone)]
pub struct TrsProblem {
    pub q: DMatrix<f64>,
    pub f: DVector<f64>,
    pub radius_sq: f64,
    pub alpha: f64,
}

/// Global minimizer of a [`TrsProblem`] and its multiplier.
#[derive(Debug, Clone)]
pub struct TrsSolution {
    pub x: DVector<f64>,
    pub lambda: f64,
    pub hard_case: bool,
    /// `λ_min(Q)`, a by-product of the eigendecomposition.
    pub lambda_min: f64,
}

/// One evaluation of `G` at `alpha`.
#[derive(Debug, Clone)]
pub struct GEvaluation {
    pub alpha: f64,
    /// Minimizer `x(α)` on the sphere `‖x‖² = α − 1`.
    pub x: DVector<f64>,
    /// Sphere multiplier `λ(α)`.
    pub lambda: f64,
    pub g_value: f64,
    /// `G′(α)`; absent at `α = 1`.
    pub g_deriv: Option<f64>,
    pub hard_case: bool,
}

pub fn build_trs(problem: &ProblemInstance, alpha: f64) -> Result<TrsProblem> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be a finite value >= 1, got {alpha}")));
    }
    let inv = 1.0 / alpha;
    let q = problem.ata() * inv + problem.ltl() * problem.rho();
    let f = if problem.atb_is_zero() { DVector::zeros(problem.n()) } else { problem.atb() * inv };
    Ok(TrsProblem { q, f, radius_sq: alpha - 1.0, alpha })
}

pub fn solve_trs(trs: &TrsProblem, tol: f64) -> Result<TrsSolution> {
    let n = trs.q.nrows();
    if trs.q.ncols() != n || trs.f.len() != n {
        return Err(Error::Dimension(format!(
            "Q is {}x{} but f has length {}",
            trs.q.nrows(),
            trs.q.ncols(),
            trs.f.len()
        )));
    }
    if !(trs.radius_sq >= 0.0 && trs.radius_sq.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius_sq must be finite and non-negative, got {}",
            trs.radius_sq
        )));
    }
    let asym = linalg::asymmetry(&trs.q);
    if asym > 1e-12 * (1.0 + trs.q.amax()) {
        return Err(Error::NotSymmetric(asym));
    }

    let eig = linalg::sym_eigen(&trs.q)?;
    let lam1 = eig.min();
    if trs.radius_sq == 0.0 {
        return Ok(TrsSolution { x: DVector::zeros(n), lambda: lam1, hard_case: false, lambda_min: lam1 });
    }

    let values = &eig.values;
    let d = eig.vectors.tr_mul(&trs.f);
    let fnorm = trs.f.norm();
    let r2 = trs.radius_sq;

    let spread = values.amax().max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-12 * spread;
    let cluster: Vec<usize> = (0..n).filter(|&i| values[i] - lam1 <= cluster_tol).collect();
    let in_cluster = |i: usize| values[i] - lam1 <= cluster_tol;

    let orthogonal = cluster.iter().all(|&i| d[i].abs() <= HARD_CASE_THRESHOLD * fnorm);
    if orthogonal {
        let interior_sq: f64 =
            (0..n).filter(|&i| !in_cluster(i)).map(|i| (d[i] / (values[i] - lam1)).powi(2)).sum();
        if interior_sq <= r2 {
            let x = hard_case_point(&eig, &d, lam1, &in_cluster, r2, None);
            return Ok(TrsSolution { x, lambda: lam1, hard_case: true, lambda_min: lam1 });
        }
    }

    // Newton on ψ(λ) = 1/√r² − 1/‖x(λ)‖, which is close to linear below λ_min.
    let radius = r2.sqrt();
    let mut lo = lam1 - fnorm / radius - 1.0;
    let mut hi = lam1;
    let mut lambda = lam1 - fnorm / radius;
    let target = 0.25 * tol * radius;
    let mut width_before = f64::INFINITY;

    for iter in 0..SECULAR_MAX_ITER {
        let mut s = 0.0;
        let mut s3 = 0.0;
        for i in 0..n {
            let w = values[i] - lambda;
            let t = d[i] / w;
            s += t * t;
            s3 += t * t / w;
        }
        let norm = s.sqrt();
        if (norm - radius).abs() <= target {
            let x = &eig.vectors * d.zip_map(values, |di, vi| di / (vi - lambda));
            return Ok(TrsSolution { x, lambda, hard_case: false, lambda_min: lam1 });
        }
        if norm < radius {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let ulp = 4.0 * f64::EPSILON * lambda.abs().max(spread).max(1.0);
        if hi - lo <= ulp {
            if lam1 - hi > ulp {
                // Bracket exhausted away from λ_min: accept only if the
                // sphere constraint is met to a usable precision.
                if (s - r2).abs() <= 1e-8 * (1.0 + r2) {
                    let x = &eig.vectors * d.zip_map(values, |di, vi| di / (vi - lambda));
                    return Ok(TrsSolution { x, lambda, hard_case: false, lambda_min: lam1 });
                }
                return Err(Error::SecularNoConvergence(SECULAR_MAX_ITER));
            }
            // Bracket exhausted against λ_min: a near-hard case. Finish by
            // filling the radius along the λ_min eigenspace.
            let x = hard_case_point(&eig, &d, lam1, &in_cluster, r2, Some(&cluster));
            return Ok(TrsSolution { x, lambda: lam1, hard_case: true, lambda_min: lam1 });
        }
        let psi = 1.0 / radius - 1.0 / norm;
        let dpsi = s3 / (norm * norm * norm);
        let mut next = lambda - psi / dpsi;
        // Bisect when Newton leaves the bracket or fails to halve it every two steps.
        let stalled = iter % 2 == 1 && hi - lo > 0.5 * width_before;
        if iter % 2 == 1 {
            width_before = hi - lo;
        }
        if stalled || !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        lambda = next;
    }
    Err(Error::SecularNoConvergence(SECULAR_MAX_ITER))
}

/// `x = Σ_{i∉E} dᵢ/(Λᵢ − λ₁) vᵢ + τ·u` with `u` a unit vector in the
/// `λ₁`-eigenspace `E` and `τ` chosen so that `‖x‖² = r2`.
///
/// `u` follows the component of `d` inside `E` when `cluster` is given and
/// that component is nonzero; otherwise it is the first eigenvector of `E`
/// with its first nonzero entry positive.
fn hard_case_point(
    eig: &linalg::SymEigen,
    d: &DVector<f64>,
    lam1: f64,
    in_cluster: &dyn Fn(usize) -> bool,
    r2: f64,
    cluster: Option<&[usize]>,
) -> DVector<f64> {
    let n = d.len();
    let mut coeffs = DVector::zeros(n);
    for i in 0..n {
        if !in_cluster(i) {
            coeffs[i] = d[i] / (eig.values[i] - lam1);
        }
    }
    let mut x = &eig.vectors * &coeffs;
    let tau = (r2 - x.norm_squared()).max(0.0).sqrt();

    let directed = cluster.and_then(|idx| {
        let mut u = DVector::zeros(n);
        for &i in idx {
            u += eig.vectors.column(i) * d[i];
        }
        let nu = u.norm();
        (nu > 0.0).then(|| u / nu)
    });
    let u = directed.unwrap_or_else(|| {
        let mut v = eig.vectors.column(0).into_owned();
        canonical_sign(&mut v);
        v
    });
    x += u * tau;
    x
}

/// Evaluate `G(α)` together with `x(α)`, `λ(α)` and `G′(α)`.
pub fn eval_g(problem: &ProblemInstance, alpha: f64, tol: f64) -> Result<GEvaluation> {
    let trs = build_trs(problem, alpha)?;
    if alpha == 1.0 {
        return Ok(GEvaluation {
            alpha,
            x: DVector::zeros(problem.n()),
            lambda: linalg::lambda_min(&trs.q)?,
            g_value: problem.btb(),
            g_deriv: None,
            hard_case: false,
        });
    }
    let sol = solve_trs(&trs, tol)?;
    let x = sol.x;

    let fractional = problem.residual_sq(&x) / alpha + problem.rho() * problem.seminorm_sq(&x);
    let quadratic = x.dot(&(&trs.q * &x)) - 2.0 * trs.f.dot(&x) + problem.btb() / alpha;
    let scale = 1.0 + fractional.abs() + x.norm_squared() * trs.q.amax();
    if (quadratic - fractional).abs() > CONSISTENCY_TOL * scale {
        return Err(Error::InconsistentObjective { alpha, quadratic, fractional });
    }

    let mut eval = GEvaluation {
        alpha,
        x,
        lambda: sol.lambda,
        g_value: fractional,
        g_deriv: None,
        hard_case: sol.hard_case,
    };
    eval.g_deriv = Some(grad_g(&eval, problem));
    Ok(eval)
}

/// `G′(α) = λ(α) − ‖Ax(α) − b‖²/α²`.
pub fn grad_g(eval: &GEvaluation, problem: &ProblemInstance) -> f64 {
    eval.lambda - problem.residual_sq(&eval.x) / (eval.alpha * eval.alpha)
}
