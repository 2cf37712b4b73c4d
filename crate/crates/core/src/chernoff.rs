//! Chernoff divergence and information between Gaussians, and the
//! `rho_A` / `rho_L` statistics comparing ASE and LSE on block models.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::eigen::symmetrized;
use crate::embed::EmbeddingMethod;
use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;
use crate::limits::{sbm_block_gaussians, RhoRegime};
use crate::model::{mixture_from_block_model, BlockModelParams};

const T_LO: f64 = 1e-6;
const T_HI: f64 = 1.0 - 1e-6;
const SEED_GRID: usize = 64;
const T_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-8;

/// A Chernoff quantity, which is `+inf` when the supports differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Divergence::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    /// For arithmetic only; never stored.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Divergence) -> Divergence {
        match (self, other) {
            (Divergence::Infinite, o) | (o, Divergence::Infinite) => o,
            (Divergence::Finite(a), Divergence::Finite(b)) => Divergence::Finite(a.min(b)),
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffEval {
    pub t_star: f64,
    pub value: Divergence,
    pub iterations: usize,
}

/// The pair reduced to the common range of the covariances.
enum Prepared {
    Infinite,
    Finite {
        delta: DVector<f64>,
        s0: DMatrix<f64>,
        s1: DMatrix<f64>,
        logdet0: f64,
        logdet1: f64,
        equal_cov: bool,
    },
}

fn range_basis(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetrized(cov).symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(*v));
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| max > 0.0 && eig.eigenvalues[i] > RANK_TOL * max)
        .collect();
    let mut u = DMatrix::zeros(cov.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        u.set_column(c, &eig.eigenvectors.column(i));
    }
    u
}

fn logdet_pd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

fn prepare(g0: &GaussianParams, g1: &GaussianParams) -> Result<Prepared> {
    if g0.dim() != g1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Gaussians of dimension {} and {}",
            g0.dim(),
            g1.dim()
        )));
    }
    let d = g0.dim();
    let delta_full = g1.mean() - g0.mean();
    let u0 = range_basis(g0.cov());
    let u1 = range_basis(g1.cov());
    let r = u0.ncols();
    if r != u1.ncols() {
        return Ok(Prepared::Infinite);
    }
    let (delta, s0, s1) = if r == d {
        (delta_full, g0.cov().clone(), g1.cov().clone())
    } else {
        let p0 = &u0 * u0.transpose();
        let p1 = &u1 * u1.transpose();
        if (&p0 - &p1).amax() > RANGE_TOL {
            return Ok(Prepared::Infinite);
        }
        let outside = (&delta_full - &p0 * &delta_full).norm();
        let scale = delta_full.norm();
        if outside > RANGE_TOL * scale {
            return Ok(Prepared::Infinite);
        }
        if r == 0 {
            // Both are point masses at the same location.
            return Ok(Prepared::Finite {
                delta: DVector::zeros(0),
                s0: DMatrix::zeros(0, 0),
                s1: DMatrix::zeros(0, 0),
                logdet0: 0.0,
                logdet1: 0.0,
                equal_cov: true,
            });
        }
        let ut = u0.transpose();
        (
            &ut * delta_full,
            symmetrized(&(&ut * g0.cov() * &u0)),
            symmetrized(&(&ut * g1.cov() * &u0)),
        )
    };
    let logdet0 = logdet_pd(&s0).ok_or(Error::NotPsd { min_eigenvalue: 0.0 })?;
    let logdet1 = logdet_pd(&s1).ok_or(Error::NotPsd { min_eigenvalue: 0.0 })?;
    let scale = s0.amax().max(s1.amax());
    let equal_cov = (&s0 - &s1).amax() <= 1e-14 * scale;
    Ok(Prepared::Finite { delta, s0, s1, logdet0, logdet1, equal_cov })
}

/// Quadratic term `delta^T S_t^{-1} delta` and `log |S_t|` at `t`.
fn mix_terms(delta: &DVector<f64>, s0: &DMatrix<f64>, s1: &DMatrix<f64>, t: f64) -> Option<(f64, f64)> {
    if delta.is_empty() {
        return Some((0.0, 0.0));
    }
    let st = s0 * t + s1 * (1.0 - t);
    let chol = st.cholesky()?;
    let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let sol = chol.solve(delta);
    Some((delta.dot(&sol), logdet))
}

impl Prepared {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Prepared::Infinite => f64::INFINITY,
            Prepared::Finite { delta, s0, s1, logdet0, logdet1, .. } => match mix_terms(delta, s0, s1, t) {
                Some((quad, logdet)) => {
                    0.5 * t * (1.0 - t) * quad + 0.5 * (logdet - t * logdet0 - (1.0 - t) * logdet1)
                }
                None => f64::INFINITY,
            },
        }
    }
}

/// `C_t(F_0, F_1)` for two Gaussians.
pub fn gaussian_chernoff_divergence(g0: &GaussianParams, g1: &GaussianParams, t: f64) -> Result<Divergence> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidT(t));
    }
    let v = prepare(g0, g1)?.eval(t);
    Ok(if v.is_finite() { Divergence::Finite(v.max(0.0)) } else { Divergence::Infinite })
}

/// Maximize a function on `[T_LO, T_HI]`: seed grid, golden section on the best
/// bracket, then a parabolic polish step.
fn maximize(f: impl Fn(f64) -> f64) -> (f64, f64, usize) {
    let grid: Vec<f64> = (0..SEED_GRID)
        .map(|i| T_LO + (T_HI - T_LO) * i as f64 / (SEED_GRID - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let (lo_v, hi_v) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi_v - lo_v <= 1e-15 * hi_v.abs().max(1.0) {
        return (0.5, f(0.5), 0);
    }
    let mut best = 0;
    for i in 1..SEED_GRID {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SEED_GRID - 1)];
    let (mut t_best, mut v_best) = (grid[best], vals[best]);

    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > T_TOL {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > v_best {
            t_best = t;
            v_best = v;
        }
    }
    // Polish: one parabolic step through points around the current best.
    let h = 1e-4_f64.min(t_best - T_LO).min(T_HI - t_best);
    if h > 0.0 {
        let (fl, fr) = (f(t_best - h), f(t_best + h));
        let denom = fl - 2.0 * v_best + fr;
        if denom < 0.0 {
            let t = (t_best + 0.5 * h * (fl - fr) / denom).clamp(T_LO, T_HI);
            let v = f(t);
            if v > v_best {
                t_best = t;
                v_best = v;
            }
        }
    }
    (t_best, v_best, iterations)
}

/// `sup_t C_t(F_0, F_1)`.
pub fn gaussian_chernoff_information(g0: &GaussianParams, g1: &GaussianParams) -> Result<ChernoffEval> {
    let prep = prepare(g0, g1)?;
    match &prep {
        Prepared::Infinite => Ok(ChernoffEval { t_star: 0.5, value: Divergence::Infinite, iterations: 0 }),
        Prepared::Finite { equal_cov: true, .. } => Ok(ChernoffEval {
            t_star: 0.5,
            value: Divergence::Finite(prep.eval(0.5).max(0.0)),
            iterations: 0,
        }),
        Prepared::Finite { .. } => {
            let (t, v, iterations) = maximize(|t| prep.eval(t));
            if !v.is_finite() {
                return Ok(ChernoffEval { t_star: 0.5, value: Divergence::Infinite, iterations });
            }
            Ok(ChernoffEval { t_star: t, value: Divergence::Finite(v.max(0.0)), iterations })
        }
    }
}

/// `sup_t t(1-t)/2 delta^T S_t^+ delta`, dropping the log-determinant term.
pub fn quadratic_chernoff_information(g0: &GaussianParams, g1: &GaussianParams) -> Result<ChernoffEval> {
    if g0.dim() != g1.dim() {
        return Err(Error::DimensionMismatch("Gaussians of different dimension".into()));
    }
    let delta = g1.mean() - g0.mean();
    let eval = |t: f64| -> f64 {
        let st = symmetrized(&(g0.cov() * t + g1.cov() * (1.0 - t)));
        let eig = st.symmetric_eigen();
        let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(*v));
        let mut quad = 0.0;
        let mut outside = 0.0;
        for i in 0..eig.eigenvalues.len() {
            let c = eig.eigenvectors.column(i).dot(&delta);
            if max > 0.0 && eig.eigenvalues[i] > RANK_TOL * max {
                quad += c * c / eig.eigenvalues[i];
            } else {
                outside += c * c;
            }
        }
        if outside.sqrt() > RANGE_TOL * delta.norm() {
            f64::INFINITY
        } else {
            0.5 * t * (1.0 - t) * quad
        }
    };
    if !eval(0.5).is_finite() {
        return Ok(ChernoffEval { t_star: 0.5, value: Divergence::Infinite, iterations: 0 });
    }
    let (t, v, iterations) = maximize(eval);
    Ok(ChernoffEval { t_star: t, value: Divergence::Finite(v), iterations })
}

fn min_pairwise(
    params: &BlockModelParams,
    n: usize,
    method: EmbeddingMethod,
    info: fn(&GaussianParams, &GaussianParams) -> Result<ChernoffEval>,
) -> Result<Divergence> {
    let d = params.numerical_rank();
    let f = mixture_from_block_model(params, d)?;
    let gs = sbm_block_gaussians(&f, method, RhoRegime::Dense, n, 1.0)?;
    let mut out = Divergence::Infinite;
    for k in 0..gs.len() {
        for l in (k + 1)..gs.len() {
            out = out.min(info(&gs[k], &gs[l])?.value);
        }
    }
    Ok(out)
}

/// Minimum pairwise Chernoff information between the ASE block Gaussians.
pub fn rho_ase(params: &BlockModelParams, n: usize) -> Result<Divergence> {
    min_pairwise(params, n, EmbeddingMethod::Ase, gaussian_chernoff_information)
}

/// Minimum pairwise Chernoff information between the LSE block Gaussians.
pub fn rho_lse(params: &BlockModelParams, n: usize) -> Result<Divergence> {
    min_pairwise(params, n, EmbeddingMethod::Lse, gaussian_chernoff_information)
}

/// `rho` without the log-determinant term, for cross-checking large-`n` behaviour.
pub fn rho_without_log_det(params: &BlockModelParams, n: usize, method: EmbeddingMethod) -> Result<Divergence> {
    min_pairwise(params, n, method, quadratic_chernoff_information)
}

/// Large-`n` closed form of `rho_A` for the two-block model with latent positions `p`, `q`.
pub fn two_block_rho_ase_approx(p: f64, q: f64, pi1: f64, n: usize) -> f64 {
    let pi2 = 1.0 - pi1;
    let s1 = (pi1 * p.powi(4) * (1.0 - p * p) + pi2 * p * q.powi(3) * (1.0 - p * q)).sqrt();
    let s2 = (pi1 * p.powi(3) * q * (1.0 - p * q) + pi2 * q.powi(4) * (1.0 - q * q)).sqrt();
    n as f64 * (p - q).powi(2) * (pi1 * p * p + pi2 * q * q).powi(2) / (2.0 * (s1 + s2).powi(2))
}

/// Large-`n` closed form of `rho_L` for the two-block model.
pub fn two_block_rho_lse_approx(p: f64, q: f64, pi1: f64, n: usize) -> f64 {
    let pi2 = 1.0 - pi1;
    let s1 = (pi1 * p * (1.0 - p * p) + pi2 * q * (1.0 - p * q)).sqrt();
    let s2 = (pi1 * p * (1.0 - p * q) + pi2 * q * (1.0 - q * q)).sqrt();
    2.0 * n as f64 * (p.sqrt() - q.sqrt()).powi(2) * (pi1 * p + pi2 * q).powi(2) / (s1 + s2).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridModel {
    /// `B = [[p^2, pq], [pq, q^2]]`.
    TwoBlock,
    /// `p` on the diagonal and `q` off it.
    ThreeBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    Infinite,
    Invalid,
    Degenerate,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Ok => "ok",
            CellStatus::Infinite => "inf",
            CellStatus::Invalid => "invalid",
            CellStatus::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub p: f64,
    pub r: f64,
    pub rho_a: Option<Divergence>,
    pub rho_l: Option<Divergence>,
    pub ratio: Option<f64>,
    pub status: CellStatus,
}

pub fn grid_params(model: GridModel, p: f64, q: f64, pi: &[f64]) -> Result<BlockModelParams> {
    match model {
        GridModel::TwoBlock => BlockModelParams::two_block(p, q, pi.to_vec()),
        GridModel::ThreeBlock => BlockModelParams::three_block(p, q, pi.to_vec()),
    }
}

fn grid_cell(p: f64, r: f64, pi: &[f64], n: usize, model: GridModel) -> GridCell {
    let invalid = GridCell { p, r, rho_a: None, rho_l: None, ratio: None, status: CellStatus::Invalid };
    let q = p + r;
    let params = match grid_params(model, p, q, pi) {
        Ok(b) => b,
        Err(_) => return invalid,
    };
    let (rho_a, rho_l) = match (rho_ase(&params, n), rho_lse(&params, n)) {
        (Ok(a), Ok(l)) => (a, l),
        _ => return invalid,
    };
    let (status, ratio) = match (rho_a, rho_l) {
        (Divergence::Finite(a), Divergence::Finite(l)) if a > 0.0 && l > 0.0 => (CellStatus::Ok, Some(a / l)),
        (Divergence::Finite(_), Divergence::Finite(_)) => (CellStatus::Degenerate, None),
        _ => (CellStatus::Infinite, None),
    };
    GridCell { p, r, rho_a: Some(rho_a), rho_l: Some(rho_l), ratio, status }
}

/// `rho_A / rho_L` over `q = p + r`, row-major in `p`. Invalid models are
/// recorded per cell rather than returned as errors.
pub fn rho_ratio_grid(p_values: &[f64], r_values: &[f64], pi: &[f64], n: usize, model: GridModel) -> Vec<GridCell> {
    let cells: Vec<(f64, f64)> = p_values
        .iter()
        .flat_map(|&p| r_values.iter().map(move |&r| (p, r)))
        .collect();
    cells.par_iter().map(|&(p, r)| grid_cell(p, r, pi, n, model)).collect()
}
