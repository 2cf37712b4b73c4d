//! Adjacency and Laplacian spectral embeddings.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

pub use crate::eigen::{symmetric_eig_top, EigenOrder, EigenPairs};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbeddingMethod {
    Ase,
    Lse,
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingMethod::Ase => "ASE",
            EmbeddingMethod::Lse => "LSE",
        })
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ase" => Ok(EmbeddingMethod::Ase),
            "lse" => Ok(EmbeddingMethod::Lse),
            other => Err(Error::InvalidInput(format!("unknown embedding method '{other}'"))),
        }
    }
}

/// Policy for negative eigenvalues among the top-`d` by magnitude in ASE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeEigenvalues {
    /// Fail with [`Error::NegativeTopEigenvalue`].
    Reject,
    /// Keep them and scale by `|lambda|^{1/2}`.
    Magnitude,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    /// n x d, one vertex per row.
    pub rows: DMatrix<f64>,
    pub method: EmbeddingMethod,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    for j in 0..n {
        for i in (j + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// `diag(M 1)^{-1/2} M diag(M 1)^{-1/2}`.
pub fn normalized_laplacian(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let deg: f64 = m.column(i).sum();
        if deg <= 0.0 {
            return Err(Error::ZeroDegreeVertex(i));
        }
        scale.push(deg.sqrt().recip());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| m[(i, j)] * scale[i] * scale[j]))
}

/// Adjacency spectral embedding `U S^{1/2}` from the top-`d` eigenpairs by magnitude.
/// Negative eigenvalues among them are rejected.
pub fn ase(a: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    ase_with(a, d, NegativeEigenvalues::Reject)
}

pub fn ase_with(a: &DMatrix<f64>, d: usize, policy: NegativeEigenvalues) -> Result<Embedding> {
    check_symmetric(a)?;
    let pairs = symmetric_eig_top(a, d, EigenOrder::ByMagnitude)?;
    if policy == NegativeEigenvalues::Reject {
        if let Some((index, &value)) = pairs.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeTopEigenvalue { index, value });
        }
    }
    Ok(scaled(pairs, EmbeddingMethod::Ase))
}

/// Laplacian spectral embedding from the top-`d` eigenpairs of `L(A)` by value.
pub fn lse(a: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let l = normalized_laplacian(a)?;
    let pairs = symmetric_eig_top(&l, d, EigenOrder::ByValue)?;
    if let Some((index, &value)) = pairs.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeTopEigenvalue { index, value });
    }
    Ok(scaled(pairs, EmbeddingMethod::Lse))
}

/// Embed with the given method; ASE keeps negative eigenvalues by magnitude.
pub fn embed(a: &DMatrix<f64>, d: usize, method: EmbeddingMethod) -> Result<Embedding> {
    match method {
        EmbeddingMethod::Ase => ase_with(a, d, NegativeEigenvalues::Magnitude),
        EmbeddingMethod::Lse => lse(a, d),
    }
}

fn scaled(pairs: EigenPairs, method: EmbeddingMethod) -> Embedding {
    let mut rows = pairs.vectors.clone();
    for (c, v) in pairs.values.iter().enumerate() {
        rows.column_mut(c).scale_mut(v.abs().sqrt());
    }
    Embedding { rows, method, eigenvalues: pairs.values, eigenvectors: pairs.vectors }
}

#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// Orthogonal d x d matrix minimizing `||Y W - X||_F`.
    pub rotation: DMatrix<f64>,
    pub residual_frobenius: f64,
    /// True when `Y^T X` is rank deficient and the minimizer is not unique.
    pub degenerate: bool,
}

impl AlignmentResult {
    pub fn apply(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        y * &self.rotation
    }
}

/// Orthogonal Procrustes alignment of `y` onto `x`.
pub fn procrustes_align(y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<AlignmentResult> {
    if y.shape() != x.shape() {
        return Err(Error::DimensionMismatch(format!(
            "cannot align {:?} onto {:?}",
            y.shape(),
            x.shape()
        )));
    }
    let d = x.ncols();
    let m = y.transpose() * x;
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let rotation = u * vt;
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * smax).count();
    let degenerate = smax == 0.0 || rank < d;
    let residual_frobenius = (y * &rotation - x).norm();
    Ok(AlignmentResult { rotation, residual_frobenius, degenerate })
}

/// `diag(X X^T 1)^{-1/2} X`, the latent positions seen by the Laplacian.
pub fn tilde_latents(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let total: DVector<f64> = x.row_sum().transpose();
    let s = x * total;
    let mut out = x.clone();
    for i in 0..x.nrows() {
        if !(s[i] > 0.0) {
            return Err(Error::ZeroExpectedDegree(i));
        }
        out.row_mut(i).scale_mut(s[i].sqrt().recip());
    }
    Ok(out)
}
