//! Random dot product graphs and stochastic block models.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::symmetrized;
use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const INNER_PRODUCT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Seeded generator for one of the independent streams used by the samplers.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub const LATENT_STREAM: u64 = 0;
pub const GRAPH_STREAM: u64 = 1;

/// Latent position distribution supported on finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureOfPointMasses {
    weights: Vec<f64>,
    /// K x d, one atom per row.
    atoms: DMatrix<f64>,
}

impl MixtureOfPointMasses {
    pub fn new(weights: Vec<f64>, atoms: DMatrix<f64>) -> Result<Self> {
        let k = atoms.nrows();
        let d = atoms.ncols();
        if k == 0 || d == 0 {
            return Err(Error::InvalidMixture("need at least one atom and one dimension".into()));
        }
        if weights.len() != k {
            return Err(Error::InvalidMixture(format!(
                "{} weights for {} atoms",
                weights.len(),
                k
            )));
        }
        check_weights(&weights).map_err(Error::InvalidMixture)?;
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMixture("atoms contain non-finite values".into()));
        }
        let gram = &atoms * atoms.transpose();
        for i in 0..k {
            for j in 0..k {
                let g = gram[(i, j)];
                if !(-INNER_PRODUCT_TOL..=1.0 + INNER_PRODUCT_TOL).contains(&g) {
                    return Err(Error::InvalidMixture(format!(
                        "inner product of atoms {i} and {j} is {g}, outside [0, 1]"
                    )));
                }
            }
        }
        let mix = MixtureOfPointMasses { weights, atoms };
        let delta = mix.second_moment();
        let ev = delta.clone().symmetric_eigenvalues();
        let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min = ev.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if max == 0.0 || min <= 1e-12 * max {
            return Err(Error::InvalidMixture(format!(
                "second moment matrix has rank below {d}"
            )));
        }
        Ok(mix)
    }

    /// Erdos-Renyi graphs as a one-atom mixture at `sqrt(p)`.
    pub fn erdos_renyi(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidMixture(format!("edge probability {p} outside (0, 1]")));
        }
        Self::new(vec![1.0], DMatrix::from_element(1, 1, p.sqrt()))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn dim(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atom(&self, k: usize) -> DVector<f64> {
        self.atoms.row(k).transpose()
    }

    /// E[X X^T].
    pub fn second_moment(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut delta = DMatrix::zeros(d, d);
        for (k, &w) in self.weights.iter().enumerate() {
            let v = self.atom(k);
            delta.ger(w, &v, &v, 1.0);
        }
        symmetrized(&delta)
    }

    /// E[X].
    pub fn mean(&self) -> DVector<f64> {
        let mut mu = DVector::zeros(self.dim());
        for (k, &w) in self.weights.iter().enumerate() {
            mu.axpy(w, &self.atom(k), 1.0);
        }
        mu
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> std::result::Result<(), String> {
    if weights.is_empty() {
        return Err("no weights".into());
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(format!("weight {w} is not positive"));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(format!("weights sum to {s}, not 1"));
    }
    Ok(())
}

/// Block probability matrix together with the block proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModelParams {
    block_probs: DMatrix<f64>,
    weights: Vec<f64>,
}

impl BlockModelParams {
    pub fn new(block_probs: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        let k = block_probs.nrows();
        if block_probs.ncols() != k || k == 0 {
            return Err(Error::DimensionMismatch(format!(
                "block matrix must be square and nonempty, got {}x{}",
                k,
                block_probs.ncols()
            )));
        }
        if weights.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} block weights for a {k}x{k} block matrix",
                weights.len()
            )));
        }
        check_weights(&weights).map_err(Error::InvalidMixture)?;
        for i in 0..k {
            for j in 0..k {
                let b = block_probs[(i, j)];
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::ProbabilityOutOfRange { i, j, value: b });
                }
                if (b - block_probs[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "block matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let block_probs = symmetrized(&block_probs);
        let ev = block_probs.clone().symmetric_eigenvalues();
        let min = ev.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(BlockModelParams { block_probs, weights })
    }

    /// Two blocks with latent positions `p` and `q` on a line.
    pub fn two_block(p: f64, q: f64, weights: Vec<f64>) -> Result<Self> {
        let b = DMatrix::from_row_slice(2, 2, &[p * p, p * q, p * q, q * q]);
        Self::new(b, weights)
    }

    /// Three blocks: `p` on the diagonal, `q` elsewhere.
    pub fn three_block(p: f64, q: f64, weights: Vec<f64>) -> Result<Self> {
        let b = DMatrix::from_fn(3, 3, |i, j| if i == j { p } else { q });
        Self::new(b, weights)
    }

    /// Full-rank two-block model used by the limit-theory experiments.
    pub fn example1() -> Self {
        Self::new(
            DMatrix::from_row_slice(2, 2, &[0.42, 0.42, 0.42, 0.5]),
            vec![0.6, 0.4],
        )
        .expect("valid example model")
    }

    pub fn block_probs(&self) -> &DMatrix<f64> {
        &self.block_probs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.block_probs)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.block_probs.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

pub(crate) fn numerical_rank(b: &DMatrix<f64>) -> usize {
    let ev = b.clone().symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    ev.iter().filter(|v| v.abs() > 1e-10 * max).count()
}

/// Factor B = V V^T and return the mixture placing weight `pi_k` on row `k` of `V`.
///
/// Atoms come from the top-`d` eigenpairs of `B` in descending order. Each
/// eigenvector is signed so that its first nonzero entry is positive.
pub fn mixture_from_block_model(params: &BlockModelParams, d: usize) -> Result<MixtureOfPointMasses> {
    let b = params.block_probs();
    let k = b.nrows();
    let rank = params.numerical_rank();
    if d != rank {
        return Err(Error::RankMismatch { requested: d, numerical: rank });
    }
    let eig = b.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut atoms = DMatrix::zeros(k, d);
    for (c, &idx) in order.iter().take(d).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let first = v.iter().copied().find(|x| x.abs() > 1e-12 * v.amax().max(f64::MIN_POSITIVE));
        if first.is_some_and(|x| x < 0.0) {
            v.neg_mut();
        }
        atoms.set_column(c, &(v * lambda.sqrt()));
    }
    // Clean roundoff so that atom inner products reproduce B within tolerance.
    let gram = &atoms * atoms.transpose();
    let err = (&gram - b).amax();
    if err > 1e-9 * scale.max(1.0) {
        return Err(Error::InvalidMixture(format!(
            "factorization error {err:e} too large"
        )));
    }
    MixtureOfPointMasses::new(params.weights().to_vec(), atoms)
}

/// One draw of an RDPG: latent positions, adjacency, and optional block labels.
#[derive(Debug, Clone)]
pub struct RdpgSample {
    pub latents: DMatrix<f64>,
    pub sparsity: f64,
    pub adjacency: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
}

impl RdpgSample {
    /// Draw latents from `mixture` and then a graph with `P = rho X X^T`.
    pub fn draw(mixture: &MixtureOfPointMasses, n: usize, sparsity: f64, seed: u64) -> Result<Self> {
        let (latents, labels) = sample_latents(mixture, n, seed)?;
        let adjacency = sample_graph(&latents, sparsity, seed)?;
        Ok(RdpgSample { latents, sparsity, adjacency, labels: Some(labels) })
    }

    pub fn n(&self) -> usize {
        self.latents.nrows()
    }
}

/// I.i.d. latent positions from the mixture, with the atom index of each row.
pub fn sample_latents(
    mixture: &MixtureOfPointMasses,
    n: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut rng = seeded_rng(seed, LATENT_STREAM);
    let w = mixture.weights();
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = w.len() - 1;
        for (i, wi) in w.iter().enumerate() {
            acc += wi;
            if u < acc {
                k = i;
                break;
            }
        }
        labels.push(k);
    }
    let atoms = mixture.atoms();
    let x = DMatrix::from_fn(n, mixture.dim(), |i, j| atoms[(labels[i], j)]);
    Ok((x, labels))
}

fn check_sparsity(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidInput(format!("sparsity {rho} outside (0, 1]")));
    }
    Ok(())
}

fn edge_probability(xt: &DMatrix<f64>, rho: f64, i: usize, j: usize) -> Result<f64> {
    let p = rho * xt.column(i).dot(&xt.column(j));
    if p < -INNER_PRODUCT_TOL || p > 1.0 + INNER_PRODUCT_TOL || !p.is_finite() {
        return Err(Error::ProbabilityOutOfRange { i, j, value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `rho X X^T` with a zero diagonal.
pub fn probability_matrix(x: &DMatrix<f64>, sparsity: f64) -> Result<DMatrix<f64>> {
    check_sparsity(sparsity)?;
    let n = x.nrows();
    let xt = x.transpose();
    let mut p = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let v = edge_probability(&xt, sparsity, i, j)?;
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

/// Symmetric hollow adjacency with independent Bernoulli edges above the diagonal.
pub fn sample_graph(x: &DMatrix<f64>, sparsity: f64, seed: u64) -> Result<DMatrix<f64>> {
    check_sparsity(sparsity)?;
    let n = x.nrows();
    let xt = x.transpose();
    let mut rng = seeded_rng(seed, GRAPH_STREAM);
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let p = edge_probability(&xt, sparsity, i, j)?;
            let u: f64 = rng.random();
            if u < p {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    Ok(a)
}

/// Row `i` of the result is the latent position of vertex `i` given block labels.
pub fn latents_from_labels(mixture: &MixtureOfPointMasses, labels: &[usize]) -> Result<DMatrix<f64>> {
    let atoms = mixture.atoms();
    if let Some(&bad) = labels.iter().find(|&&l| l >= atoms.nrows()) {
        return Err(Error::InvalidInput(format!("label {bad} has no atom")));
    }
    Ok(DMatrix::from_fn(labels.len(), mixture.dim(), |i, j| atoms[(labels[i], j)]))
}
