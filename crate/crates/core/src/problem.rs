//! Problem data for the regularized total least squares program
//!
//! ```text
//! min_x  ‖Ax − b‖² / (‖x‖² + 1) + ρ‖Lx‖²
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// The data `(A, b, L, ρ)` together with the Gram products every solve needs.
///
/// Construction validates dimensions, `ρ > 0` and full row rank of `L`.
/// Instances are immutable.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: DMatrix<f64>,
    b: DVector<f64>,
    l: DMatrix<f64>,
    rho: f64,
    ata: DMatrix<f64>,
    atb: DVector<f64>,
    ltl: DMatrix<f64>,
    btb: f64,
}

impl ProblemInstance {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, l: DMatrix<f64>, rho: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Dimension("A must be non-empty".into()));
        }
        if b.len() != m {
            return Err(Error::Dimension(format!("b has length {} but A has {m} rows", b.len())));
        }
        let (k, ln) = l.shape();
        if ln != n {
            return Err(Error::Dimension(format!("L has {ln} columns but A has {n}")));
        }
        if k == 0 || k > n {
            return Err(Error::Dimension(format!("L must have between 1 and n = {n} rows, got {k}")));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        if a.iter().chain(b.iter()).chain(l.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in A, b or L".into()));
        }
        let rank = linalg::numerical_rank(&l);
        if rank < k {
            return Err(Error::RankDeficient { rank, rows: k });
        }

        let at = a.transpose();
        let ata = linalg::symmetrize(&(&at * &a));
        let atb = &at * &b;
        let ltl = linalg::symmetrize(&(l.transpose() * &l));
        let btb = b.norm_squared();
        Ok(Self { a, b, l, rho, ata, atb, ltl, btb })
    }

    /// Same data with a different penalty; Gram products are reused.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        let mut out = self.clone();
        out.rho = rho;
        Ok(out)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn ata(&self) -> &DMatrix<f64> {
        &self.ata
    }
    pub fn atb(&self) -> &DVector<f64> {
        &self.atb
    }
    pub fn ltl(&self) -> &DMatrix<f64> {
        &self.ltl
    }
    pub fn btb(&self) -> f64 {
        self.btb
    }

    /// Rows of `A`.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }
    /// Unknowns.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }
    /// Rows of `L`.
    pub fn k(&self) -> usize {
        self.l.nrows()
    }

    pub fn b_is_zero(&self) -> bool {
        self.btb == 0.0
    }

    /// `Aᵀb` vanishes relative to `‖A‖·‖b‖`.
    pub fn atb_is_zero(&self) -> bool {
        let scale = self.a.norm() * self.btb.sqrt();
        self.atb.norm() <= 1e-14 * scale
    }

    /// `‖Ax − b‖²`.
    pub fn residual_sq(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x - &self.b).norm_squared()
    }

    /// `‖Lx‖²`.
    pub fn seminorm_sq(&self, x: &DVector<f64>) -> f64 {
        (&self.l * x).norm_squared()
    }

    /// Objective of the original program at `x`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.residual_sq(x) / (x.norm_squared() + 1.0) + self.rho * self.seminorm_sq(x)
    }
}
