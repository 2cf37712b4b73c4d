//! Limit theory for ASE and LSE when the latent distribution has finite support.
//!
//! All expectations are exact weighted sums over the atoms of the mixture.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::eigen::symmetrized;
use crate::embed::EmbeddingMethod;
use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;
use crate::model::{numerical_rank, BlockModelParams, MixtureOfPointMasses};

/// Sparsity regime: constant `rho = 1`, or `rho -> 0` with `n rho` growing fast enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoRegime {
    Dense,
    Vanishing,
}

impl fmt::Display for RhoRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoRegime::Dense => "dense",
            RhoRegime::Vanishing => "vanishing",
        })
    }
}

impl FromStr for RhoRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense" => Ok(RhoRegime::Dense),
            "vanishing" | "sparse" => Ok(RhoRegime::Vanishing),
            other => Err(Error::InvalidInput(format!("unknown regime '{other}'"))),
        }
    }
}

impl RhoRegime {
    fn dense(self) -> bool {
        self == RhoRegime::Dense
    }
}

#[derive(Debug, Clone)]
pub struct MixtureMoments {
    pub mu: DVector<f64>,
    pub delta: DMatrix<f64>,
    pub mu_tilde: DVector<f64>,
    pub delta_tilde: DMatrix<f64>,
}

/// Inner products `nu_k^T mu` for every atom.
fn mean_inner_products(f: &MixtureOfPointMasses, mu: &DVector<f64>) -> Result<Vec<f64>> {
    (0..f.n_atoms())
        .map(|k| {
            let v = f.atom(k).dot(mu);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::NonpositiveMeanInnerProduct(k))
            }
        })
        .collect()
}

pub fn moments(f: &MixtureOfPointMasses) -> Result<MixtureMoments> {
    let mu = f.mean();
    let delta = f.second_moment();
    let m = mean_inner_products(f, &mu)?;
    let d = f.dim();
    let mut mu_tilde = DVector::zeros(d);
    let mut delta_tilde = DMatrix::zeros(d, d);
    for (k, &w) in f.weights().iter().enumerate() {
        let v = f.atom(k);
        mu_tilde.axpy(w / m[k], &v, 1.0);
        delta_tilde.ger(w / m[k], &v, &v, 1.0);
    }
    Ok(MixtureMoments { mu, delta, mu_tilde, delta_tilde: symmetrized(&delta_tilde) })
}

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ev = m.clone().symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if max == 0.0 || min <= 1e-13 * max {
        return Err(Error::SingularDelta);
    }
    m.clone()
        .try_inverse()
        .map(|inv| symmetrized(&inv))
        .ok_or(Error::SingularDelta)
}

/// Conditional covariance of the ASE CLT at latent position `x`.
pub fn ase_row_cov(f: &MixtureOfPointMasses, x: &DVector<f64>, regime: RhoRegime) -> Result<DMatrix<f64>> {
    check_dim(f, x)?;
    let delta_inv = inverse(&f.second_moment())?;
    let d = f.dim();
    let mut e = DMatrix::zeros(d, d);
    for (k, &w) in f.weights().iter().enumerate() {
        let v = f.atom(k);
        let s = x.dot(&v);
        let weight = if regime.dense() { s - s * s } else { s };
        e.ger(w * weight, &v, &v, 1.0);
    }
    Ok(symmetrized(&(&delta_inv * e * &delta_inv)))
}

/// Conditional covariance of the LSE CLT at latent position `x`.
pub fn lse_row_cov(f: &MixtureOfPointMasses, x: &DVector<f64>, regime: RhoRegime) -> Result<DMatrix<f64>> {
    check_dim(f, x)?;
    let mom = moments(f)?;
    let dt_inv = inverse(&mom.delta_tilde)?;
    let x_mu = x.dot(&mom.mu);
    if !(x_mu > 0.0) {
        return Err(Error::InvalidInput(format!(
            "x has inner product {x_mu} with the mean latent position"
        )));
    }
    let b = x / (2.0 * x_mu);
    let d = f.dim();
    let mut out = DMatrix::zeros(d, d);
    for (k, &w) in f.weights().iter().enumerate() {
        let v = f.atom(k);
        let a = &dt_inv * &v / v.dot(&mom.mu) - &b;
        let s = x.dot(&v);
        let weight = if regime.dense() { s - s * s } else { s } / x_mu;
        out.ger(w * weight, &a, &a, 1.0);
    }
    Ok(symmetrized(&out))
}

fn check_dim(f: &MixtureOfPointMasses, x: &DVector<f64>) -> Result<()> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} for a {}-dimensional mixture",
            x.len(),
            f.dim()
        )));
    }
    Ok(())
}

/// Finite-`n` Gaussian approximation of each block's embedded rows.
///
/// ASE rows of block `k` are approximated by `N(sqrt(rho) nu_k, Sigma_k / n)`.
/// LSE rows by `N(nu_k / sqrt(n nu_k^T mu), Sigma~_k / n^2)`, using block sizes
/// `n pi_k`. In the vanishing regime the covariances use the `o(1)` limits and
/// the LSE covariance is further divided by `rho`. The dense regime requires
/// `sparsity == 1`.
pub fn sbm_block_gaussians(
    f: &MixtureOfPointMasses,
    method: EmbeddingMethod,
    regime: RhoRegime,
    n: usize,
    sparsity: f64,
) -> Result<Vec<GaussianParams>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::InvalidInput(format!("sparsity {sparsity} outside (0, 1]")));
    }
    if regime.dense() && sparsity != 1.0 {
        return Err(Error::InvalidInput(
            "the dense regime is defined for sparsity 1 only".into(),
        ));
    }
    let nf = n as f64;
    let mu = f.mean();
    let mut out = Vec::with_capacity(f.n_atoms());
    for k in 0..f.n_atoms() {
        let v = f.atom(k);
        let g = match method {
            EmbeddingMethod::Ase => {
                let cov = ase_row_cov(f, &v, regime)? / nf;
                GaussianParams::new(&v * sparsity.sqrt(), cov)?
            }
            EmbeddingMethod::Lse => {
                let m = v.dot(&mu);
                if !(m > 0.0) {
                    return Err(Error::NonpositiveMeanInnerProduct(k));
                }
                let cov = lse_row_cov(f, &v, regime)? / (nf * nf * sparsity);
                GaussianParams::new(&v / (m * nf).sqrt(), cov)?
            }
        };
        out.push(g);
    }
    Ok(out)
}

/// Limit of `||X^ W - sqrt(rho) X||_F^2` for ASE.
pub fn ase_frobenius_limit(f: &MixtureOfPointMasses, regime: RhoRegime) -> Result<f64> {
    let delta = f.second_moment();
    let delta_inv = inverse(&delta)?;
    let mu = f.mean();
    let d = f.dim();
    let mut e = DMatrix::zeros(d, d);
    for (k, &w) in f.weights().iter().enumerate() {
        let v = f.atom(k);
        let mut s = v.dot(&mu);
        if regime.dense() {
            s -= (v.transpose() * &delta * &v)[(0, 0)];
        }
        e.ger(w * s, &v, &v, 1.0);
    }
    Ok((&delta_inv * e * &delta_inv).trace())
}

/// Limit of `n rho ||X_breve W - X~||_F^2` for LSE, as a double sum of `g(X_1, X_2)`
/// against the weight `(X_1^T X_2 - (X_1^T X_2)^2) / X_2^T mu`.
pub fn lse_frobenius_limit(f: &MixtureOfPointMasses, regime: RhoRegime) -> Result<f64> {
    let mom = moments(f)?;
    let dt_inv = inverse(&mom.delta_tilde)?;
    let m = mean_inner_products(f, &mom.mu)?;
    let w = f.weights();
    let mut total = 0.0;
    for k in 0..f.n_atoms() {
        let x1 = f.atom(k);
        let a = &dt_inv * &x1 / m[k];
        for l in 0..f.n_atoms() {
            let x2 = f.atom(l);
            let diff = &a - &x2 / (2.0 * m[l]);
            let s = x1.dot(&x2);
            let weight = if regime.dense() { s - s * s } else { s } / m[l];
            total += w[k] * w[l] * diff.norm_squared() * weight;
        }
    }
    Ok(total)
}

/// Same limit as [`lse_frobenius_limit`] through the expanded single and double
/// expectations.
pub fn lse_frobenius_limit_expanded(f: &MixtureOfPointMasses, regime: RhoRegime) -> Result<f64> {
    let mom = moments(f)?;
    let dt_inv = inverse(&mom.delta_tilde)?;
    let dt_inv2 = &dt_inv * &dt_inv;
    let m = mean_inner_products(f, &mom.mu)?;
    let w = f.weights();
    let mut total = 0.0;
    for k in 0..f.n_atoms() {
        let x1 = f.atom(k);
        let xx = x1.norm_squared();
        let quad_dt = (x1.transpose() * &mom.delta_tilde * &x1)[(0, 0)];
        let mut s = x1.dot(&mom.mu_tilde);
        if regime.dense() {
            s -= quad_dt;
        }
        let t_dt = (x1.transpose() * &dt_inv2 * &x1)[(0, 0)];
        total += w[k] * (t_dt * s / (m[k] * m[k]) - 3.0 * xx / (4.0 * m[k] * m[k]));
        if regime.dense() {
            let quad_d = (x1.transpose() * &mom.delta * &x1)[(0, 0)];
            total -= w[k] * xx * quad_d / (4.0 * m[k].powi(3));
            for l in 0..f.n_atoms() {
                let x2 = f.atom(l);
                let c = x1.dot(&x2);
                // tr(D~^{-1} x1 x1^T x2 x2^T) = (x2^T D~^{-1} x1)(x1^T x2)
                let t = (x2.transpose() * &dt_inv * &x1)[(0, 0)] * c;
                total += w[k] * w[l] * t * c / (m[k] * m[l] * m[l]);
            }
        }
    }
    Ok(total)
}

/// Limit of `n^2 d_kk`, the scaled within-block variance of the eigenvector rows.
pub fn within_block_limit(
    f: &MixtureOfPointMasses,
    k: usize,
    method: EmbeddingMethod,
    regime: RhoRegime,
) -> Result<f64> {
    if k >= f.n_atoms() {
        return Err(Error::InvalidInput(format!("block {k} out of range")));
    }
    let nu_k = f.atom(k);
    let d = f.dim();
    let w = f.weights();
    match method {
        EmbeddingMethod::Ase => {
            let delta_inv = inverse(&f.second_moment())?;
            let mut e = DMatrix::zeros(d, d);
            for (l, &wl) in w.iter().enumerate() {
                let v = f.atom(l);
                let s = nu_k.dot(&v);
                let weight = if regime.dense() { s - s * s } else { s };
                e.ger(wl * weight, &v, &v, 1.0);
            }
            Ok((&delta_inv * &delta_inv * &delta_inv * e).trace())
        }
        EmbeddingMethod::Lse => {
            let mom = moments(f)?;
            let dt_inv = inverse(&mom.delta_tilde)?;
            let m = mean_inner_products(f, &mom.mu)?;
            let shift = &mom.delta_tilde * &nu_k / (2.0 * m[k]);
            let mut e = DMatrix::zeros(d, d);
            for (l, &wl) in w.iter().enumerate() {
                let v = f.atom(l);
                let c = &v / m[l] - &shift;
                let s = nu_k.dot(&v);
                let weight = if regime.dense() { s - s * s } else { s } / m[k];
                e.ger(wl * weight, &c, &c, 1.0);
            }
            Ok((&dt_inv * &dt_inv * &dt_inv * e).trace())
        }
    }
}

/// Dense-regime within-block limit written in terms of `B` and `pi` only.
pub fn within_block_closed_form(
    b: &DMatrix<f64>,
    pi: &[f64],
    k: usize,
    method: EmbeddingMethod,
) -> Result<f64> {
    let params = BlockModelParams::new(b.clone(), pi.to_vec())?;
    let kk = params.n_blocks();
    if k >= kk {
        return Err(Error::InvalidInput(format!("block {k} out of range")));
    }
    if numerical_rank(b) < kk {
        return Err(Error::SingularB);
    }
    let binv = b.clone().try_inverse().ok_or(Error::SingularB)?;
    let z = |l: usize| b[(k, l)] * (1.0 - b[(k, l)]);
    match method {
        EmbeddingMethod::Ase => {
            let mut s = 0.0;
            for l in 0..kk {
                for lp in 0..kk {
                    s += z(l) * binv[(l, lp)].powi(2) / (pi[l] * pi[lp]);
                }
            }
            Ok(s)
        }
        EmbeddingMethod::Lse => {
            let mu: Vec<f64> = (0..kk).map(|r| (0..kk).map(|l| pi[l] * b[(r, l)]).sum()).collect();
            let mut zeta1 = 0.0;
            for l in 0..kk {
                for lp in 0..kk {
                    zeta1 += z(l) * binv[(l, lp)].powi(2) * mu[lp] / (pi[l] * pi[lp] * mu[k]);
                }
            }
            let zeta2: f64 = (0..kk).map(|l| z(l) * binv[(k, l)]).sum::<f64>() / (pi[k] * mu[k]);
            let zeta3: f64 =
                (0..kk).map(|l| pi[l] * z(l)).sum::<f64>() / (4.0 * pi[k] * mu[k] * mu[k]);
            Ok(zeta1 - zeta2 + zeta3)
        }
    }
}

/// Mean squared distance from rows of block `k` to the centroid of block `l`.
pub fn empirical_within_block(eigvecs: &DMatrix<f64>, labels: &[usize], k: usize, l: usize) -> Result<f64> {
    if labels.len() != eigvecs.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            eigvecs.nrows()
        )));
    }
    let d = eigvecs.ncols();
    let mut centroid = DVector::zeros(d);
    let mut nl = 0usize;
    for (i, &lab) in labels.iter().enumerate() {
        if lab == l {
            centroid += eigvecs.row(i).transpose();
            nl += 1;
        }
    }
    if nl == 0 {
        return Err(Error::EmptyBlock(l));
    }
    centroid /= nl as f64;
    let mut total = 0.0;
    let mut nk = 0usize;
    for (i, &lab) in labels.iter().enumerate() {
        if lab == k {
            total += (eigvecs.row(i).transpose() - &centroid).norm_squared();
            nk += 1;
        }
    }
    if nk == 0 {
        return Err(Error::EmptyBlock(k));
    }
    Ok(total / nk as f64)
}
