//! K-means, Gaussian mixture EM, oracle classifiers and matched error rates.
//!
//! Labels are 0-based throughout: a clustering into `K` groups uses `0..K`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::eigen::symmetrized;
use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;
use crate::model::{check_weights, seeded_rng};

pub const KMEANS_MAX_ITER: usize = 300;
pub const GMM_MAX_ITER: usize = 500;
pub const GMM_TOL: f64 = 1e-8;
pub const GMM_RIDGE: f64 = 1e-8;
pub const MAX_MATCH_BLOCKS: usize = 10;

/// Stream offset for clustering restarts, away from the sampling streams.
const RESTART_STREAM: u64 = 16;

#[derive(Debug, Clone)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub components: Vec<GaussianParams>,
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    /// K x d.
    pub centers: DMatrix<f64>,
    pub model: Option<GmmModel>,
    /// Inertia for k-means, mean per-point log-likelihood for the GMM.
    pub objective: f64,
    pub converged: bool,
    pub restarts_used: usize,
    /// Objective after each iteration of the winning restart.
    pub trace: Vec<f64>,
}

/// Row-major copy of the points for tight inner loops.
struct Points {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Points {
    fn new(m: &DMatrix<f64>) -> Self {
        let (n, d) = m.shape();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
        Points { n, d, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(p: &Points) -> usize {
    let mut rows: Vec<&[f64]> = (0..p.n).map(|i| p.row(i)).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}

/// k-means++ seeding; returns a flat K x d array of centers.
fn kmeanspp(p: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = p.d;
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.random_range(0..p.n);
    centers.extend_from_slice(p.row(first));
    let mut dist: Vec<f64> = (0..p.n).map(|i| sq_dist(p.row(i), p.row(first))).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = p.n - 1;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if acc > u && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..p.n)
        };
        let c = p.row(pick).to_vec();
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(p.row(i), &c));
        }
        centers.extend_from_slice(&c);
    }
    centers
}

fn assign(p: &Points, centers: &[f64], k: usize, labels: &mut [usize]) -> f64 {
    let d = p.d;
    let mut inertia = 0.0;
    for i in 0..p.n {
        let x = p.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dc = sq_dist(x, &centers[c * d..(c + 1) * d]);
            if dc < best_d {
                best_d = dc;
                best = c;
            }
        }
        labels[i] = best;
        inertia += best_d;
    }
    inertia
}

fn to_matrix(flat: &[f64], k: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(k, d, flat)
}

struct LloydRun {
    labels: Vec<usize>,
    centers: Vec<f64>,
    inertia: f64,
    converged: bool,
    trace: Vec<f64>,
}

fn lloyd(p: &Points, k: usize, mut centers: Vec<f64>) -> LloydRun {
    let d = p.d;
    let mut labels = vec![usize::MAX; p.n];
    let mut prev = labels.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut inertia = assign(p, &centers, k, &mut labels);
    trace.push(inertia);
    for _ in 0..KMEANS_MAX_ITER {
        // Update step.
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for i in 0..p.n {
            counts[labels[i]] += 1;
            for (j, v) in p.row(i).iter().enumerate() {
                sums[labels[i] * d + j] += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centers[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            } else {
                // Move an empty center onto the point farthest from its own center.
                let far = (0..p.n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(p.row(a), &centers[labels[a] * d..(labels[a] + 1) * d]);
                        let db = sq_dist(p.row(b), &centers[labels[b] * d..(labels[b] + 1) * d]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                let row = p.row(far).to_vec();
                centers[c * d..(c + 1) * d].copy_from_slice(&row);
            }
        }
        prev.copy_from_slice(&labels);
        inertia = assign(p, &centers, k, &mut labels);
        trace.push(inertia);
        if labels == prev {
            converged = true;
            break;
        }
    }
    LloydRun { labels, centers, inertia, converged, trace }
}

/// Lloyd's algorithm from k-means++ seeds, keeping the lowest-inertia restart.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<ClusteringResult> {
    let p = Points::new(points);
    if k == 0 || p.n < k {
        return Err(Error::InvalidInput(format!("cannot form {k} clusters from {} points", p.n)));
    }
    if p.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("points contain non-finite values".into()));
    }
    if distinct_rows(&p) < k {
        return Err(Error::DegeneratePoints(k));
    }
    let restarts = restarts.max(1);
    let mut best: Option<LloydRun> = None;
    for r in 0..restarts {
        let mut rng = seeded_rng(seed, RESTART_STREAM + r as u64);
        let run = lloyd(&p, k, kmeanspp(&p, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let b = best.expect("at least one restart");
    Ok(ClusteringResult {
        labels: b.labels,
        centers: to_matrix(&b.centers, k, p.d),
        model: None,
        objective: b.inertia,
        converged: b.converged,
        restarts_used: restarts,
        trace: b.trace,
    })
}

struct Component {
    weight: f64,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    /// Inverse of the Cholesky factor and the log-normalizer.
    l_inv: DMatrix<f64>,
    log_norm: f64,
}

impl Component {
    fn new(weight: f64, mean: Vec<f64>, cov: DMatrix<f64>, index: usize) -> Result<Self> {
        let d = mean.len();
        let chol = cov.clone().cholesky().ok_or(Error::CovarianceCollapse(index))?;
        let l = chol.l();
        let l_inv = l.clone().try_inverse().ok_or(Error::CovarianceCollapse(index))?;
        let logdet = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !logdet.is_finite() {
            return Err(Error::CovarianceCollapse(index));
        }
        let log_norm = weight.ln() - 0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + logdet);
        Ok(Component { weight, mean, cov, l_inv, log_norm })
    }

    fn log_density(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let d = x.len();
        for (s, (xi, mi)) in scratch.iter_mut().zip(x.iter().zip(&self.mean)) {
            *s = xi - mi;
        }
        let mut q = 0.0;
        for r in 0..d {
            let mut z = 0.0;
            for c in 0..=r {
                z += self.l_inv[(r, c)] * scratch[c];
            }
            q += z * z;
        }
        self.log_norm - 0.5 * q
    }
}

fn m_step(p: &Points, resp: &[f64], k: usize, ridge: f64) -> Result<Vec<Component>> {
    let d = p.d;
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let nk: f64 = (0..p.n).map(|i| resp[i * k + c]).sum();
        if !(nk > 0.0) {
            return Err(Error::CovarianceCollapse(c));
        }
        let mut mean = vec![0.0; d];
        for i in 0..p.n {
            let r = resp[i * k + c];
            for (m, x) in mean.iter_mut().zip(p.row(i)) {
                *m += r * x;
            }
        }
        for m in mean.iter_mut() {
            *m /= nk;
        }
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..p.n {
            let r = resp[i * k + c];
            let x = p.row(i);
            for a in 0..d {
                let da = x[a] - mean[a];
                for b in 0..=a {
                    cov[(a, b)] += r * da * (x[b] - mean[b]);
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                let v = cov[(a, b)] / nk;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
            cov[(a, a)] += ridge;
        }
        out.push(Component::new(nk / p.n as f64, mean, cov, c)?);
    }
    Ok(out)
}

/// E-step; fills responsibilities and returns the mean log-likelihood.
fn e_step(p: &Points, comps: &[Component], resp: &mut [f64]) -> f64 {
    let k = comps.len();
    let mut scratch = vec![0.0; p.d];
    let mut logs = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..p.n {
        let x = p.row(i);
        for (c, comp) in comps.iter().enumerate() {
            logs[c] = comp.log_density(x, &mut scratch);
        }
        let m = logs.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let s: f64 = logs.iter().map(|v| (v - m).exp()).sum();
        let lse = m + s.ln();
        for c in 0..k {
            resp[i * k + c] = (logs[c] - lse).exp();
        }
        total += lse;
    }
    total / p.n as f64
}

struct EmRun {
    comps: Vec<Component>,
    resp: Vec<f64>,
    loglik: f64,
    converged: bool,
    trace: Vec<f64>,
}

fn em_once(p: &Points, k: usize, ridge: f64, rng: &mut ChaCha8Rng) -> Result<EmRun> {
    let centers = kmeanspp(p, k, rng);
    let mut labels = vec![0; p.n];
    assign(p, &centers, k, &mut labels);
    let mut resp = vec![0.0; p.n * k];
    for (i, &l) in labels.iter().enumerate() {
        resp[i * k + l] = 1.0;
    }
    let mut comps = m_step(p, &resp, k, ridge)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut loglik = f64::NEG_INFINITY;
    for _ in 0..GMM_MAX_ITER {
        let ll = e_step(p, &comps, &mut resp);
        trace.push(ll);
        let gain = ll - loglik;
        loglik = ll;
        if gain.abs() < GMM_TOL {
            converged = true;
            break;
        }
        comps = m_step(p, &resp, k, ridge)?;
    }
    Ok(EmRun { comps, resp, loglik, converged, trace })
}

/// Full-covariance Gaussian mixture EM, keeping the best log-likelihood over restarts.
pub fn gmm_em(points: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<ClusteringResult> {
    let p = Points::new(points);
    let d = p.d;
    if k == 0 || p.n < k * (d + 1) {
        return Err(Error::InvalidInput(format!(
            "need at least {} points for {k} components in dimension {d}",
            k * (d + 1)
        )));
    }
    if p.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("points contain non-finite values".into()));
    }
    if distinct_rows(&p) < k {
        return Err(Error::DegeneratePoints(k));
    }
    let mut mean = vec![0.0; d];
    for i in 0..p.n {
        for (m, x) in mean.iter_mut().zip(p.row(i)) {
            *m += x / p.n as f64;
        }
    }
    let total_var: f64 = (0..p.n).map(|i| sq_dist(p.row(i), &mean)).sum::<f64>() / p.n as f64;
    let ridge = GMM_RIDGE * total_var / d as f64;

    let restarts = restarts.max(1);
    let mut best: Option<EmRun> = None;
    let mut last_err = None;
    for r in 0..restarts {
        let mut rng = seeded_rng(seed, RESTART_STREAM + r as u64);
        match em_once(&p, k, ridge, &mut rng) {
            Ok(run) => {
                if best.as_ref().is_none_or(|b| run.loglik > b.loglik) {
                    best = Some(run);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let run = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or(Error::CovarianceCollapse(0))),
    };
    let labels: Vec<usize> = (0..p.n)
        .map(|i| {
            let row = &run.resp[i * k..(i + 1) * k];
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    let mut centers = DMatrix::zeros(k, d);
    let mut weights = Vec::with_capacity(k);
    let mut components = Vec::with_capacity(k);
    for (c, comp) in run.comps.iter().enumerate() {
        for j in 0..d {
            centers[(c, j)] = comp.mean[j];
        }
        weights.push(comp.weight);
        components.push(GaussianParams::new(DVector::from_column_slice(&comp.mean), comp.cov.clone())?);
    }
    let wsum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= wsum;
    }
    Ok(ClusteringResult {
        labels,
        centers,
        model: Some(GmmModel { weights, components }),
        objective: run.loglik,
        converged: run.converged,
        restarts_used: restarts,
        trace: run.trace,
    })
}

/// Misclassification rate after the best relabeling of `predicted`.
pub fn error_rate(predicted: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    if k > MAX_MATCH_BLOCKS {
        return Err(Error::TooManyBlocks(k));
    }
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted labels for {} true labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Ok(0.0);
    }
    if let Some(&bad) = predicted.iter().chain(truth).find(|&&l| l >= k) {
        return Err(Error::InvalidInput(format!("label {bad} outside 0..{k}")));
    }
    let mut confusion = vec![0usize; k * k];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[p * k + t] += 1;
    }
    // Heap's algorithm over permutations of the predicted labels.
    let mut perm: Vec<usize> = (0..k).collect();
    let score = |perm: &[usize]| (0..k).map(|p| confusion[p * k + perm[p]]).sum::<usize>();
    let mut best = score(&perm);
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(score(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(1.0 - best as f64 / predicted.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRates {
    pub bayes_rate: f64,
    pub bayes_stderr: f64,
    pub linear_rate: f64,
    pub linear_stderr: f64,
    pub samples: usize,
}

/// Monte Carlo error rates of the Bayes rule and the nearest-centroid rule
/// under a known Gaussian mixture.
pub fn oracle_rates(gaussians: &[GaussianParams], weights: &[f64], seed: u64, samples: usize) -> Result<OracleRates> {
    let k = gaussians.len();
    if k == 0 || weights.len() != k {
        return Err(Error::DimensionMismatch(format!("{} weights for {k} Gaussians", weights.len())));
    }
    check_weights(weights).map_err(Error::InvalidMixture)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let d = gaussians[0].dim();
    if gaussians.iter().any(|g| g.dim() != d) {
        return Err(Error::DimensionMismatch("Gaussians of different dimension".into()));
    }
    let comps: Vec<Component> = gaussians
        .iter()
        .zip(weights)
        .map(|(g, &w)| {
            Component::new(w, g.mean().iter().copied().collect(), symmetrized(g.cov()), 0).map_err(|_| {
                Error::NotPsd { min_eigenvalue: g.cov().clone().symmetric_eigenvalues().min() }
            })
        })
        .collect::<Result<_>>()?;
    let chols: Vec<DMatrix<f64>> = comps
        .iter()
        .map(|c| c.cov.clone().cholesky().expect("checked above").l())
        .collect();
    let mut rng = seeded_rng(seed, 0);
    let mut scratch = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut z = vec![0.0; d];
    let (mut bayes_err, mut lin_err) = (0usize, 0usize);
    for _ in 0..samples {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut label = k - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                label = i;
                break;
            }
        }
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let l = &chols[label];
        for r in 0..d {
            let mut v = comps[label].mean[r];
            for c in 0..=r {
                v += l[(r, c)] * z[c];
            }
            x[r] = v;
        }
        let mut bayes = 0;
        let mut bayes_v = f64::NEG_INFINITY;
        let mut lin = 0;
        let mut lin_v = f64::INFINITY;
        for (c, comp) in comps.iter().enumerate() {
            let v = comp.log_density(&x, &mut scratch);
            if v > bayes_v {
                bayes_v = v;
                bayes = c;
            }
            let dist = sq_dist(&x, &comp.mean);
            if dist < lin_v {
                lin_v = dist;
                lin = c;
            }
        }
        bayes_err += usize::from(bayes != label);
        lin_err += usize::from(lin != label);
    }
    let m = samples as f64;
    let rate = |e: usize| e as f64 / m;
    let se = |r: f64| (r * (1.0 - r) / m).sqrt();
    let (br, lr) = (rate(bayes_err), rate(lin_err));
    Ok(OracleRates { bayes_rate: br, bayes_stderr: se(br), linear_rate: lr, linear_stderr: se(lr), samples })
}
