use nalgebra::{DMatrix, DVector};

use crate::eigen::symmetrized;
use crate::error::{Error, Result};

/// Multivariate normal given by its mean and a symmetric PSD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianParams {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "mean of length {d} with a {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite Gaussian parameters".into()));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let cov = symmetrized(&cov);
        let ev = cov.clone().symmetric_eigenvalues();
        let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min = ev.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if min < -1e-10 * max.max(1e-300) && min < -1e-10 {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(GaussianParams { mean, cov })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
