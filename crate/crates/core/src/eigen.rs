//! Partial symmetric eigendecomposition.
//!
//! Small matrices go through the dense solver in nalgebra. Larger ones use
//! Lanczos with full reorthogonalization, falling back to the dense solver if
//! the Ritz pairs fail to converge.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Matrices at or below this order are always solved densely.
pub const DENSE_MAX_DIM: usize = 320;

const LANCZOS_RESIDUAL_TOL: f64 = 1e-11;
const LANCZOS_CHECK_EVERY: usize = 8;
const LANCZOS_START_SEED: u64 = 0x5eed_1a2c_0000_0001;

/// How the top `d` eigenpairs are selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenOrder {
    /// Largest absolute value first.
    ByMagnitude,
    /// Largest algebraic value first.
    ByValue,
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// Top-`d` eigenpairs of a symmetric matrix.
///
/// Ties in the ordering key are broken by algebraic value (descending) and then
/// by position in the full spectrum. Each eigenvector is signed so that its
/// largest-magnitude coordinate is positive (first such coordinate on ties).
pub fn symmetric_eig_top(m: &DMatrix<f64>, d: usize, order: EigenOrder) -> Result<EigenPairs> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if d == 0 || d > n {
        return Err(Error::InvalidInput(format!(
            "requested {d} eigenpairs from a {n}x{n} matrix"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut pairs = if n <= DENSE_MAX_DIM || 4 * d > n {
        dense_top(m, d, order)?
    } else {
        match lanczos_top(m, d, order) {
            Ok(p) => p,
            Err(_) => dense_top(m, d, order)?,
        }
    };
    for mut col in pairs.vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(pairs)
}

fn select(values: &[f64], d: usize, order: EigenOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (values[a], values[b]);
        let primary = match order {
            EigenOrder::ByMagnitude => vb.abs().total_cmp(&va.abs()),
            EigenOrder::ByValue => std::cmp::Ordering::Equal,
        };
        primary.then(vb.total_cmp(&va)).then(a.cmp(&b))
    });
    idx.truncate(d);
    idx
}

fn dense_top(m: &DMatrix<f64>, d: usize, order: EigenOrder) -> Result<EigenPairs> {
    let sym = symmetrized(m);
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("dense symmetric eigensolver".into()))?;
    // Sort the full spectrum descending so tie-breaking by index is stable
    // regardless of the solver's internal ordering.
    let mut full: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    full.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let sorted_vals: Vec<f64> = full.iter().map(|&i| eig.eigenvalues[i]).collect();
    let chosen = select(&sorted_vals, d, order);
    let n = m.nrows();
    let mut vectors = DMatrix::zeros(n, d);
    let mut values = Vec::with_capacity(d);
    for (c, &s) in chosen.iter().enumerate() {
        values.push(sorted_vals[s]);
        vectors.set_column(c, &eig.eigenvectors.column(full[s]));
    }
    Ok(EigenPairs { values, vectors })
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = m.clone();
    let n = s.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

fn lanczos_top(m: &DMatrix<f64>, d: usize, order: EigenOrder) -> Result<EigenPairs> {
    let n = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_START_SEED);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut q = random_unit(n, &mut rng, &basis).ok_or_else(|| {
        Error::ConvergenceFailure("could not form a Lanczos start vector".into())
    })?;
    let mut w = DVector::zeros(n);
    let min_steps = (2 * d + 10).min(n);

    for j in 0..n {
        w.gemv(1.0, m, &q, 0.0);
        let a = q.dot(&w);
        w.axpy(-a, &q, 1.0);
        if j > 0 {
            w.axpy(-beta[j - 1], &basis[j - 1], 1.0);
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w.axpy(-c, v, 1.0);
            }
        }
        alpha.push(a);
        let b = w.norm();
        let steps = j + 1;
        let scale = alpha.iter().chain(beta.iter()).fold(0.0f64, |acc, v| acc.max(v.abs()));
        let breakdown = b <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        let check = steps == n
            || breakdown
            || (steps >= min_steps && (steps - min_steps) % LANCZOS_CHECK_EVERY == 0);

        if check {
            let last_beta = if breakdown { 0.0 } else { b };
            if let Some(pairs) = ritz_if_converged(&basis, &alpha, &beta, last_beta, d, order, steps == n)? {
                return Ok(pairs);
            }
        }
        if steps == n {
            break;
        }
        if breakdown {
            // Invariant subspace found; continue in its orthogonal complement.
            beta.push(0.0);
            q = match random_unit(n, &mut rng, &basis) {
                Some(v) => v,
                None => break,
            };
        } else {
            beta.push(b);
            q = &w / b;
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "Lanczos did not converge for {d} eigenpairs of order {n}"
    )))
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    for _ in 0..4 {
        let mut v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            return Some(v / nrm);
        }
    }
    None
}

fn ritz_if_converged(
    basis: &[DVector<f64>],
    alpha: &[f64],
    beta: &[f64],
    last_beta: f64,
    d: usize,
    order: EigenOrder,
    exhaustive: bool,
) -> Result<Option<EigenPairs>> {
    let m = alpha.len();
    if m < d {
        return Ok(None);
    }
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("tridiagonal eigensolver".into()))?;
    let mut full: Vec<usize> = (0..m).collect();
    full.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals: Vec<f64> = full.iter().map(|&i| eig.eigenvalues[i]).collect();
    let chosen = select(&vals, d, order);
    let theta_max = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);

    if !exhaustive {
        for &s in &chosen {
            let resid = (last_beta * eig.eigenvectors[(m - 1, full[s])]).abs();
            if resid > LANCZOS_RESIDUAL_TOL * theta_max {
                return Ok(None);
            }
        }
    }

    let n = basis[0].len();
    let mut vectors = DMatrix::zeros(n, d);
    let mut values = Vec::with_capacity(d);
    for (c, &s) in chosen.iter().enumerate() {
        values.push(vals[s]);
        let coeffs = eig.eigenvectors.column(full[s]);
        let mut v = DVector::zeros(n);
        for (k, q) in basis.iter().enumerate() {
            v.axpy(coeffs[k], q, 1.0);
        }
        let nrm = v.norm();
        vectors.set_column(c, &(v / nrm));
    }
    Ok(Some(EigenPairs { values, vectors }))
}
