//! Test problem generators.
//!
//! The one-dimensional `shaw` deconvolution problem, the 2-D atmospheric
//! `blur` operator, first-difference and Laplacian regularizers, and
//! Gaussian perturbation of the data. The discretizations follow the usual
//! regularization test-problem conventions.

pub mod io;
pub mod lcurve;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

/// Default Gaussian width of the blur point-spread function.
pub const DEFAULT_BLUR_SIGMA: f64 = 0.7;

/// Default terms `(a, w₁, w₂, φ)` of the synthetic cosine image.
pub const DEFAULT_COSINE_COEFFS: [(f64, f64, f64, f64); 3] =
    [(1.0, 0.10, 0.20, 0.0), (0.6, 0.35, -0.15, 1.0), (0.3, 0.05, 0.60, 2.5)];

/// A generated instance with its noise-free ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub instance: ProblemInstance,
    pub a_true: DMatrix<f64>,
    pub x_true: DVector<f64>,
    pub b_true: DVector<f64>,
    pub sigma: f64,
    pub seed: u64,
}

/// The 2×2 instance with one local non-global minimizer of `G`
/// (`α ≈ 11.614`) next to the global one (`α ≈ 1.630`).
pub fn bimodal_example() -> ProblemInstance {
    ProblemInstance::new(
        DMatrix::from_row_slice(2, 2, &[0.4, 0.8, 0.2, 1.0]),
        DVector::from_vec(vec![0.1, 0.5]),
        DMatrix::from_row_slice(1, 2, &[0.1, 0.8]),
        0.5,
    )
    .expect("static instance is valid")
}

/// Shaw's 1-D image restoration model on `[−π/2, π/2]`.
///
/// Midpoint rule with `h = π/n` applied to
/// `K(s, t) = (cos s + cos t)² (sin u / u)²`, `u = π(sin s + sin t)`.
/// The true solution is a sum of two Gaussians and `b = A x`.
pub fn shaw(n: usize) -> Result<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("shaw needs an even n >= 4, got {n}")));
    }
    let h = PI / n as f64;
    let t: Vec<f64> = (0..n).map(|i| -PI / 2.0 + (i as f64 + 0.5) * h).collect();
    let co: Vec<f64> = t.iter().map(|v| v.cos()).collect();
    let psi: Vec<f64> = t.iter().map(|v| PI * v.sin()).collect();

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let u = psi[i] + psi[j];
            let sinc = if u.abs() < 1e-300 { 1.0 } else { u.sin() / u };
            let v = ((co[i] + co[j]) * sinc).powi(2) * h;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let x = DVector::from_iterator(
        n,
        t.iter().map(|&s| 2.0 * (-6.0 * (s - 0.8).powi(2)).exp() + (-2.0 * (s + 0.5).powi(2)).exp()),
    );
    let b = &a * &x;
    Ok((a, x, b))
}

/// Atmospheric turbulence blur on an `N×N` image, `n = N²`.
///
/// `A = T ⊗ T` with `T` the banded symmetric Toeplitz matrix
/// `t_d = exp(−d²/(2σ²)) / (σ√(2π))` for `d < band`.
pub fn blur(n: usize, band: usize, blur_sigma: f64) -> Result<DMatrix<f64>> {
    let side = perfect_square_root(n)
        .ok_or_else(|| Error::InvalidArgument(format!("blur needs a perfect square n, got {n}")))?;
    if band == 0 {
        return Err(Error::InvalidArgument("blur band must be at least 1".into()));
    }
    if !(blur_sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("blur sigma must be positive, got {blur_sigma}")));
    }
    let norm = 1.0 / (blur_sigma * (2.0 * PI).sqrt());
    let t = DMatrix::from_fn(side, side, |i, j| {
        let d = i.abs_diff(j);
        if d < band {
            norm * (-((d * d) as f64) / (2.0 * blur_sigma * blur_sigma)).exp()
        } else {
            0.0
        }
    });
    Ok(t.kronecker(&t))
}

fn perfect_square_root(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n && n > 0).then_some(r)
}

/// First-derivative operator: row `i` is `e_i − e_{i+1}`. Size `(n−1)×n`.
pub fn first_difference_l(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("first difference needs n >= 2, got {n}")));
    }
    let mut l = DMatrix::zeros(n - 1, n);
    for i in 0..n - 1 {
        l[(i, i)] = 1.0;
        l[(i, i + 1)] = -1.0;
    }
    Ok(l)
}

/// Five-point Laplacian on a `side×side` grid with Dirichlet truncation.
///
/// One row per grid node (column-stacked ordering): `−4` on the node, `+1`
/// on each neighbour inside the grid. The matrix is square and
/// nonsingular, so it has full row rank.
pub fn laplacian_2d_l(side: usize) -> Result<DMatrix<f64>> {
    if side < 3 {
        return Err(Error::InvalidArgument(format!("laplacian needs side >= 3, got {side}")));
    }
    let n = side * side;
    let idx = |row: usize, col: usize| col * side + row;
    let mut l = DMatrix::zeros(n, n);
    for col in 0..side {
        for row in 0..side {
            let p = idx(row, col);
            l[(p, p)] = -4.0;
            if row > 0 {
                l[(p, idx(row - 1, col))] = 1.0;
            }
            if row + 1 < side {
                l[(p, idx(row + 1, col))] = 1.0;
            }
            if col > 0 {
                l[(p, idx(row, col - 1))] = 1.0;
            }
            if col + 1 < side {
                l[(p, idx(row, col + 1))] = 1.0;
            }
        }
    }
    Ok(l)
}

/// `X(z₁, z₂) = Σ a cos(w₁z₁ + w₂z₂ + φ)` for `z₁, z₂ ∈ 1..=side`, stacked
/// column by column and scaled to unit norm.
pub fn cosine_image(side: usize, coeffs: &[(f64, f64, f64, f64)]) -> Result<DVector<f64>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("cosine image needs at least one term".into()));
    }
    if side == 0 {
        return Err(Error::InvalidArgument("image side must be positive".into()));
    }
    let mut x = DVector::zeros(side * side);
    for z2 in 1..=side {
        for z1 in 1..=side {
            let v: f64 = coeffs
                .iter()
                .map(|&(a, w1, w2, phi)| a * (w1 * z1 as f64 + w2 * z2 as f64 + phi).cos())
                .sum();
            x[(z2 - 1) * side + (z1 - 1)] = v;
        }
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("cosine image is identically zero".into()));
    }
    Ok(x / norm)
}

/// Standard normal variates from ChaCha8 seeded with `seed_from_u64`.
///
/// Uniforms take the top 53 bits of `next_u64`; pairs are mapped by the
/// Box–Muller transform `√(−2 ln(1 − u₁))·(cos 2πu₂, sin 2πu₂)`.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// `A = A_true + σE`, `b = b_true + σe`; `E` is drawn row by row, then `e`.
pub fn add_noise(
    a_true: &DMatrix<f64>,
    b_true: &DVector<f64>,
    l: DMatrix<f64>,
    rho: f64,
    sigma: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {sigma}")));
    }
    let mut normal = NormalStream::new(seed);
    let (m, n) = a_true.shape();
    let mut a = a_true.clone();
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] += sigma * normal.next_normal();
        }
    }
    let b = DVector::from_iterator(m, b_true.iter().map(|v| v + sigma * normal.next_normal()));
    ProblemInstance::new(a, b, l, rho)
}

/// Noise-free `(A, x, b, L)`.
pub type Truth = (DMatrix<f64>, DVector<f64>, DVector<f64>, DMatrix<f64>);

/// Named problem family with its size parameters, e.g. `shaw:20` or `blur:1024:3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    Shaw { n: usize },
    Blur { n: usize, band: usize },
}

impl GeneratorSpec {
    pub fn n(&self) -> usize {
        match *self {
            GeneratorSpec::Shaw { n } | GeneratorSpec::Blur { n, .. } => n,
        }
    }

    /// Noise-free operator, ground truth and regularizer.
    pub fn truth(&self) -> Result<Truth> {
        match *self {
            GeneratorSpec::Shaw { n } => {
                let (a, x, b) = shaw(n)?;
                Ok((a, x, b, first_difference_l(n)?))
            }
            GeneratorSpec::Blur { n, band } => {
                let a = blur(n, band, DEFAULT_BLUR_SIGMA)?;
                let side = perfect_square_root(n).expect("checked by blur");
                let x = cosine_image(side, &DEFAULT_COSINE_COEFFS)?;
                let b = &a * &x;
                Ok((a, x, b, laplacian_2d_l(side)?))
            }
        }
    }

    pub fn generate(&self, sigma: f64, seed: u64, rho: f64) -> Result<GeneratedProblem> {
        let (a_true, x_true, b_true, l) = self.truth()?;
        let instance = add_noise(&a_true, &b_true, l, rho, sigma, seed)?;
        Ok(GeneratedProblem { instance, a_true, x_true, b_true, sigma, seed })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Shaw { n } => write!(f, "shaw:{n}"),
            GeneratorSpec::Blur { n, band } => write!(f, "blur:{n}:{band}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "unrecognized generator spec `{s}` (expected shaw:N or blur:N:BAND)"
            ))
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["shaw", n] => Ok(GeneratorSpec::Shaw { n: num(n)? }),
            ["blur", n, band] => Ok(GeneratorSpec::Blur { n: num(n)?, band: num(band)? }),
            ["blur", n] => Ok(GeneratorSpec::Blur { n: num(n)?, band: 3 }),
            _ => Err(bad()),
        }
    }
}
