//! Dense symmetric helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const EIGEN_MAX_SWEEPS: usize = 100_000;

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Largest absolute difference between `m` and its transpose.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let eig =
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::EigenFailure)?;

    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEigen { values, vectors })
}

pub fn lambda_min(m: &DMatrix<f64>) -> Result<f64> {
    Ok(sym_eigen(m)?.min())
}

pub fn lambda_max(m: &DMatrix<f64>) -> Result<f64> {
    Ok(sym_eigen(m)?.max())
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with tolerance `max(rows, cols) * eps * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    s.iter().filter(|&&v| v > tol).count()
}

/// Orthonormal basis of the null space of a full-row-rank `k x n` matrix.
///
/// Householder QR of the `n x (k + n)` block `[Lᵀ | I]` yields a square
/// orthogonal factor whose first `k` columns span `range(Lᵀ)`; the trailing
/// `n - k` columns span its orthogonal complement, which is `null(L)`.
pub fn null_space_basis(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (k, n) = l.shape();
    let rank = numerical_rank(l);
    if rank < k {
        return Err(Error::RankDeficient { rank, rows: k });
    }
    if k == n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut block = DMatrix::zeros(n, k + n);
    block.view_mut((0, 0), (n, k)).copy_from(&l.transpose());
    block.view_mut((0, k), (n, n)).copy_from(&DMatrix::identity(n, n));
    let q = block.qr().q();
    Ok(q.columns(k, n - k).into_owned())
}

/// Flip the sign of `v` so its first entry of non-negligible magnitude is positive.
pub fn canonical_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let e = sym_eigen(&m).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0]);
        assert!((e.vectors[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn null_space_of_first_difference() {
        let l = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
        let f = null_space_basis(&l).unwrap();
        assert_eq!(f.shape(), (3, 1));
        assert!((&l * &f).norm() < 1e-14);
        assert!((f.transpose() * &f - DMatrix::identity(1, 1)).norm() < 1e-14);
        let c = 1.0 / 3.0_f64.sqrt();
        assert!((f[(0, 0)].abs() - c).abs() < 1e-14);
    }

    #[test]
    fn null_space_rejects_rank_deficiency() {
        let l = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(null_space_basis(&l), Err(Error::RankDeficient { rank: 1, rows: 2 })));
    }

    #[test]
    fn sign_rule() {
        let mut v = DVector::from_vec(vec![0.0, -0.6, 0.8]);
        canonical_sign(&mut v);
        assert_eq!(v.as_slice(), &[0.0, 0.6, -0.8]);
    }
}
