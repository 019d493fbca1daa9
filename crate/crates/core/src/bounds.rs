//! Attainment check and closed-form bounds on `α* = ‖x*‖² + 1`.
//!
//! All quantities are spectral: with `F` an orthonormal basis of `null(L)`,
//!
//! ```text
//! l₁ = λ_min(FᵀAᵀAF)
//! l₂ = λ_min([FᵀAᵀAF  FᵀAᵀb; bᵀAF  ‖b‖²])
//! ζ  = ρ·λ_min(LLᵀ),  β = 2λ_max(AᵀA),  γ = 2‖Aᵀb‖,  δ = l₂/ζ
//! ```
//!
//! The minimum of the regularized program is attained when `k = n` or
//! `l₂ < l₁`; every bound below divides by `l₁ − l₂` and is only defined
//! in that case.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::ProblemInstance;

/// Default margin for the strict inequality `l₂ < l₁`.
pub const ASSUMPTION_TOL: f64 = 1e-12;

/// Which branch of the lower-bound construction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateCase {
    /// `Aᵀb ≠ 0`.
    Generic,
    /// `Aᵀb = 0`, `b ≠ 0`: the point `α = 1` must be compared separately.
    AtbZero,
    /// `b = 0`: `x* = 0` is optimal.
    BZero,
}

/// Outcome of the attainment check.
#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub holds: bool,
    /// `λ_min(FᵀAᵀAF)`; absent when `k = n`.
    pub l1: Option<f64>,
    /// Smallest eigenvalue of the bordered matrix; absent when `k = n`.
    pub l2: Option<f64>,
    /// Orthonormal null-space basis of `L`; absent when `k = n`.
    pub null_basis: Option<DMatrix<f64>>,
}

/// Lower end of the search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub alpha_min: f64,
    pub case: DegenerateCase,
    /// Only in the generic case.
    pub kappa1: Option<f64>,
    /// Only in the generic case.
    pub kappa2: Option<f64>,
}

/// Every quantity that goes into the search interval.
///
/// `Ũ = max λ(α) + αλ′(α)` from the sharper complexity estimate is not
/// computable a priori and is not reported.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub delta: Option<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    #[serde(skip)]
    pub null_basis: Option<DMatrix<f64>>,
    pub alpha_min: f64,
    /// Upper end from the new closed-form bound (the Beck bound when `k = n`).
    pub alpha_max: f64,
    pub alpha_max_beck: f64,
    pub assumption_holds: bool,
    pub degenerate_case: DegenerateCase,
}

pub fn check_assumption(problem: &ProblemInstance, tol: f64) -> Result<AssumptionCheck> {
    let (k, n) = (problem.k(), problem.n());
    let f = linalg::null_space_basis(problem.l())?;
    if k == n {
        return Ok(AssumptionCheck { holds: true, l1: None, l2: None, null_basis: None });
    }
    let (l1, l2) = null_space_eigenvalues(problem, &f)?;
    Ok(AssumptionCheck {
        holds: l1 - l2 > tol * l1.abs().max(1.0),
        l1: Some(l1),
        l2: Some(l2),
        null_basis: Some(f),
    })
}

fn null_space_eigenvalues(problem: &ProblemInstance, f: &DMatrix<f64>) -> Result<(f64, f64)> {
    let p = f.ncols();
    let ftaf = linalg::symmetrize(&(f.transpose() * problem.ata() * f));
    let ftatb: DVector<f64> = f.transpose() * problem.atb();
    let l1 = linalg::lambda_min(&ftaf)?;

    let mut bordered = DMatrix::zeros(p + 1, p + 1);
    bordered.view_mut((0, 0), (p, p)).copy_from(&ftaf);
    for i in 0..p {
        bordered[(i, p)] = ftatb[i];
        bordered[(p, i)] = ftatb[i];
    }
    bordered[(p, p)] = problem.btb();
    let l2 = linalg::lambda_min(&bordered)?;
    Ok((l1, l2))
}

/// Spectral ingredients shared by the bound formulas.
struct Spectra {
    l1: Option<f64>,
    l2: Option<f64>,
    lmin_llt: f64,
    lmax_ata: f64,
    atb_norm: f64,
}

impl Spectra {
    fn compute(problem: &ProblemInstance, tol: f64) -> Result<(Self, AssumptionCheck)> {
        let check = check_assumption(problem, tol)?;
        let llt = linalg::symmetrize(&(problem.l() * problem.l().transpose()));
        let spectra = Spectra {
            l1: check.l1,
            l2: check.l2,
            lmin_llt: linalg::lambda_min(&llt)?,
            lmax_ata: linalg::lambda_max(problem.ata())?,
            atb_norm: problem.atb().norm(),
        };
        Ok((spectra, check))
    }

    fn zeta(&self, rho: f64) -> f64 {
        rho * self.lmin_llt
    }

    fn gap(&self) -> Result<Option<(f64, f64, f64)>> {
        match (self.l1, self.l2) {
            (Some(l1), Some(l2)) => {
                if l1 - l2 <= 0.0 {
                    return Err(Error::AssumptionViolated { l1, l2 });
                }
                Ok(Some((l1, l2, l1 - l2)))
            }
            _ => Ok(None),
        }
    }
}

fn regularized_gram(problem: &ProblemInstance, mu: f64) -> DMatrix<f64> {
    problem.ata() + problem.ltl() * mu
}

/// `‖b‖² − bᵀA(AᵀA + ρLᵀL)⁻¹Aᵀb`, the optimal value of the plain Tikhonov
/// least squares problem.
fn tikhonov_value(problem: &ProblemInstance) -> Result<f64> {
    let h = regularized_gram(problem, problem.rho());
    let chol =
        h.cholesky().ok_or_else(|| Error::InvalidArgument("AᵀA + ρLᵀL is not positive definite".into()))?;
    let y = chol.solve(problem.atb());
    Ok(problem.btb() - problem.atb().dot(&y))
}

fn lower_from_spectra(problem: &ProblemInstance, s: &Spectra, epsilon: f64) -> Result<LowerBound> {
    if problem.b_is_zero() {
        return Ok(LowerBound { alpha_min: 1.0, case: DegenerateCase::BZero, kappa1: None, kappa2: None });
    }
    let btb = problem.btb();
    if problem.atb_is_zero() {
        if !(epsilon > 0.0 && epsilon < btb) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, ‖b‖²) = (0, {btb}) when Aᵀb = 0, got {epsilon}"
            )));
        }
        return Ok(LowerBound {
            alpha_min: btb / (btb - epsilon),
            case: DegenerateCase::AtbZero,
            kappa1: None,
            kappa2: None,
        });
    }

    let j = tikhonov_value(problem)?;
    let kappa1 = match s.l2 {
        Some(l2) => l2.min(j),
        None => j,
    };
    let lmin_h = linalg::lambda_min(&regularized_gram(problem, problem.rho()))?;
    let kappa2 = lmin_h - kappa1;

    // Smaller root of κ₂t² − 2‖Aᵀb‖t + (‖b‖² − κ₁) = 0, written as
    // c / (a + √(a² − κ₂c)); for κ₂ = 0 this is c / 2a.
    let a = s.atb_norm;
    let c = btb - kappa1;
    let disc = (a * a - kappa2 * c).max(0.0);
    let r = c / (a + disc.sqrt());
    Ok(LowerBound {
        alpha_min: 1.0 + r * r,
        case: DegenerateCase::Generic,
        kappa1: Some(kappa1),
        kappa2: Some(kappa2),
    })
}

fn beck_from_spectra(problem: &ProblemInstance, s: &Spectra) -> Result<f64> {
    let btb = problem.btb();
    let zeta = s.zeta(problem.rho());
    match s.gap()? {
        None => Ok(1.0 + btb / zeta),
        Some((l1, l2, gap)) => {
            let delta = l2 / zeta;
            let num = btb + (s.lmax_ata + s.atb_norm) * (delta + 2.0 * delta.sqrt()) + l1 * (1.0 + delta);
            let base = (num / gap).max(1.0);
            Ok(1.0 + base * base + delta)
        }
    }
}

fn new_from_spectra(problem: &ProblemInstance, s: &Spectra) -> Result<f64> {
    let zeta = s.zeta(problem.rho());
    if zeta <= 0.0 {
        return Err(Error::InvalidArgument(format!("ζ = ρλ_min(LLᵀ) = {zeta} must be positive")));
    }
    let Some((_, l2, gap)) = s.gap()? else {
        return beck_from_spectra(problem, s);
    };
    let beta = 2.0 * s.lmax_ata;
    let gamma = 2.0 * s.atb_norm;
    let zl = zeta - l2;

    let t1 = -0.5
        + l2 / (2.0 * zeta)
        + (zl * zl + beta * beta + 4.0 * zeta * l2 + gamma * gamma * zeta / gap).sqrt() / (2.0 * zeta);
    let root = (gamma * gamma + gap * (4.0 * l2 + beta * beta / zeta + zl * zl / zeta)).sqrt();
    let t2 = ((gamma + root) / (2.0 * gap)).powi(2);
    Ok(1.0 + t1 + t2)
}

/// Lower end `α_min` of the search interval.
///
/// * `Aᵀb ≠ 0`: `1 + r²` with `r` the closed-form lower bound on `‖x*‖`.
/// * `Aᵀb = 0, b ≠ 0`: `‖b‖²/(‖b‖² − ε)`; `G(1) = ‖b‖²` must then be
///   compared against the minimum over the interval.
/// * `b = 0`: `1`.
pub fn alpha_lower(problem: &ProblemInstance, epsilon: f64) -> Result<LowerBound> {
    let (s, _) = Spectra::compute(problem, ASSUMPTION_TOL)?;
    lower_from_spectra(problem, &s, epsilon)
}

/// Upper end of the search interval from the classical bound on `‖x*‖²`.
pub fn alpha_upper_beck(problem: &ProblemInstance) -> Result<f64> {
    let (s, _) = Spectra::compute(problem, ASSUMPTION_TOL)?;
    beck_from_spectra(problem, &s)
}

/// Upper end of the search interval from the sharper closed-form bound.
/// Falls back to [`alpha_upper_beck`] when `k = n`.
pub fn alpha_upper_new(problem: &ProblemInstance) -> Result<f64> {
    let (s, _) = Spectra::compute(problem, ASSUMPTION_TOL)?;
    new_from_spectra(problem, &s)
}

/// Bound `U` on `|λ(α)|` over `[α_min, ∞)`.
pub fn lambda_bound_u(problem: &ProblemInstance, alpha_min: f64) -> Result<f64> {
    if !(alpha_min > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha_min must exceed 1, got {alpha_min}")));
    }
    let q = problem.ata() / alpha_min + problem.ltl() * problem.rho();
    Ok(problem.atb().norm() / (alpha_min * (alpha_min - 1.0).sqrt()) + linalg::lambda_min(&q)?)
}

/// Worst-case number of evaluations of the branch-and-bound solver.
///
/// Diagnostic only; saturates at `u64::MAX`. When `Aᵀb = 0` and `b ≠ 0`
/// the variant in terms of `λ_min(AᵀA + ρLᵀL)` is used.
pub fn iteration_bound(
    problem: &ProblemInstance,
    alpha_min: f64,
    alpha_max: f64,
    epsilon: f64,
) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let raw = if problem.atb_is_zero() && !problem.b_is_zero() {
        let lmin = linalg::lambda_min(&regularized_gram(problem, problem.rho()))?;
        4.0 * alpha_max * alpha_max * (alpha_max - 1.0) * lmin / epsilon
    } else {
        let u = lambda_bound_u(problem, alpha_min)?;
        iteration_bound_from(u, alpha_min, alpha_max, epsilon)
    };
    Ok(ceil_to_u64(raw))
}

/// `4U·α_max²(α_max − α_min) / (α_min²·ε)`, before rounding up.
pub fn iteration_bound_from(u: f64, alpha_min: f64, alpha_max: f64, epsilon: f64) -> f64 {
    4.0 * u * alpha_max * alpha_max * (alpha_max - alpha_min) / (alpha_min * alpha_min * epsilon)
}

fn ceil_to_u64(v: f64) -> u64 {
    if v.is_nan() || v <= 0.0 {
        0
    } else {
        // `as` saturates at u64::MAX.
        v.ceil() as u64
    }
}

/// Compute the complete interval estimate. Fails only on numerical errors
/// or an invalid `epsilon`; a violated assumption is reported through
/// `assumption_holds` with both upper ends set to infinity.
pub fn bound_report(problem: &ProblemInstance, epsilon: f64) -> Result<BoundReport> {
    let (s, check) = Spectra::compute(problem, ASSUMPTION_TOL)?;
    let zeta = s.zeta(problem.rho());
    let delta = s.l2.map(|l2| l2 / zeta);
    let lower = lower_from_spectra(problem, &s, epsilon)?;
    let (alpha_max, alpha_max_beck) = if check.holds {
        (new_from_spectra(problem, &s)?, beck_from_spectra(problem, &s)?)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(BoundReport {
        l1: s.l1,
        l2: s.l2,
        delta,
        beta: 2.0 * s.lmax_ata,
        gamma: 2.0 * s.atb_norm,
        zeta,
        kappa1: lower.kappa1,
        kappa2: lower.kappa2,
        null_basis: check.null_basis,
        alpha_min: lower.alpha_min,
        alpha_max,
        alpha_max_beck,
        assumption_holds: check.holds,
        degenerate_case: lower.case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::bimodal_example;
    use nalgebra::{DMatrix, DVector};

    /// Null-space eigenvalues of the bimodal example worked by hand:
    /// `F = (−0.8, 0.1)ᵀ/√0.65`, `AF = (−0.24, −0.06)ᵀ/√0.65`, so
    /// `l₁ = (0.0576 + 0.0036)/0.65` and the bordered matrix is
    /// `[[l₁, c], [c, 0.26]]` with `c = bᵀAF = −0.054/√0.65`.
    #[test]
    fn hand_computed_null_space_eigenvalues() {
        let p = bimodal_example();
        let check = check_assumption(&p, ASSUMPTION_TOL).unwrap();
        let l1 = 0.0612 / 0.65;
        let c2 = 0.054_f64.powi(2) / 0.65;
        let tr = l1 + 0.26;
        let det = l1 * 0.26 - c2;
        let l2 = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
        assert!(check.holds);
        assert!((check.l1.unwrap() - l1).abs() < 1e-14);
        assert!((check.l2.unwrap() - l2).abs() < 1e-14);
        let f = check.null_basis.unwrap();
        assert!((p.l() * &f).norm() < 1e-15);
    }

    #[test]
    fn square_l_always_holds() {
        let p = ProblemInstance::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DMatrix::identity(2, 2),
            0.1,
        )
        .unwrap();
        let c = check_assumption(&p, ASSUMPTION_TOL).unwrap();
        assert!(c.holds && c.l1.is_none() && c.null_basis.is_none());
    }

    #[test]
    fn zero_a_violates() {
        let p = ProblemInstance::new(
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            1.0,
        )
        .unwrap();
        let c = check_assumption(&p, ASSUMPTION_TOL).unwrap();
        assert!(!c.holds);
        assert_eq!(c.l1.unwrap(), 0.0);
        assert!(c.l2.unwrap().abs() < 1e-15);
        assert!(matches!(alpha_upper_new(&p), Err(Error::AssumptionViolated { .. })));
        let r = bound_report(&p, 1e-6).unwrap();
        assert!(!r.assumption_holds);
    }

    #[test]
    fn b_zero_lower() {
        let p =
            ProblemInstance::new(DMatrix::identity(2, 2), DVector::zeros(2), DMatrix::identity(2, 2), 1.0)
                .unwrap();
        let lb = alpha_lower(&p, 1e-6).unwrap();
        assert_eq!(lb.alpha_min, 1.0);
        assert_eq!(lb.case, DegenerateCase::BZero);
        assert_eq!(alpha_upper_beck(&p).unwrap(), 1.0);
    }

    fn atb_zero_instance() -> ProblemInstance {
        // A = [[1, 0], [0, 0]], b = (0, 2): Aᵀb = 0, ‖b‖² = 4.
        ProblemInstance::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 2.0]),
            DMatrix::identity(2, 2),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn atb_zero_lower() {
        let p = atb_zero_instance();
        let lb = alpha_lower(&p, 1e-6).unwrap();
        assert_eq!(lb.case, DegenerateCase::AtbZero);
        assert_eq!(lb.alpha_min, 4.0 / (4.0 - 1e-6));
        assert!(alpha_lower(&p, 4.0).is_err());
    }

    #[test]
    fn lambda_bound_identity() {
        let p =
            ProblemInstance::new(DMatrix::identity(2, 2), DVector::zeros(2), DMatrix::identity(2, 2), 1.0)
                .unwrap();
        // Q = I/2 + I and Aᵀb = 0.
        assert!((lambda_bound_u(&p, 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(lambda_bound_u(&p, 1.0).is_err());
    }

    #[test]
    fn lambda_bound_atb_zero() {
        let p = atb_zero_instance();
        let amin = 4.0 / (4.0 - 1e-6);
        let u = lambda_bound_u(&p, amin).unwrap();
        let q = p.ata() / amin + p.ltl() * p.rho();
        assert!((u - linalg::lambda_min(&q).unwrap()).abs() < 1e-15);
        assert!(u <= linalg::lambda_min(&(p.ata() + p.ltl() * p.rho())).unwrap());
        let n = iteration_bound(&p, amin, 3.0, 1e-6).unwrap();
        // λ_min(AᵀA + I) = 1.
        assert_eq!(n, (4.0 * 9.0 * 2.0 * 1.0 / 1e-6_f64).ceil() as u64);
    }

    #[test]
    fn iteration_bound_arithmetic() {
        assert_eq!(ceil_to_u64(iteration_bound_from(1.0, 2.0, 4.0, 1.0)), 32);
        assert_eq!(ceil_to_u64(f64::INFINITY), u64::MAX);
    }

    #[test]
    fn bimodal_interval() {
        let p = bimodal_example();
        let r = bound_report(&p, 1e-6).unwrap();
        assert!((r.alpha_max - 3355.5794).abs() < 5e-4, "{}", r.alpha_max);
        assert!((r.alpha_max_beck - 17551.0566).abs() < 5e-4, "{}", r.alpha_max_beck);
        assert!(r.kappa1.unwrap() < p.btb());
        assert_eq!(r.degenerate_case, DegenerateCase::Generic);
    }
}
