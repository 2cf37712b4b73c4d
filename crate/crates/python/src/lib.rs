//! Python bindings for the `rdpg` crate. Matrices cross the boundary as lists
//! of rows; labels are 0-based.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rdpg::{BlockModelParams, EmbeddingMethod, GaussianParams};

fn to_py(err: rdpg::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn matrix(rows: &[Vec<f64>], name: &str) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err(format!("{name}: rows have different lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn method(name: &str) -> PyResult<EmbeddingMethod> {
    name.parse().map_err(|_| PyValueError::new_err(format!("unknown method {name:?}")))
}

fn block_model(b: Vec<Vec<f64>>, pi: Vec<f64>) -> PyResult<BlockModelParams> {
    BlockModelParams::new(matrix(&b, "b")?, pi).map_err(to_py)
}

/// Sample a stochastic block model graph. Returns `(adjacency, labels)`.
#[pyfunction]
#[pyo3(signature = (b, pi, n, seed, sparsity=1.0))]
pub fn sample_sbm(b: Vec<Vec<f64>>, pi: Vec<f64>, n: usize, seed: u64, sparsity: f64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let params = block_model(b, pi)?;
    let f = rdpg::mixture_from_block_model(&params, params.numerical_rank()).map_err(to_py)?;
    let s = rdpg::model::RdpgSample::draw(&f, n, sparsity, seed).map_err(to_py)?;
    Ok((rows(&s.adjacency), s.labels.unwrap_or_default()))
}

#[pyfunction]
pub fn ase(adjacency: Vec<Vec<f64>>, d: usize) -> PyResult<Vec<Vec<f64>>> {
    let a = matrix(&adjacency, "adjacency")?;
    Ok(rows(&rdpg::embed::embed(&a, d, EmbeddingMethod::Ase).map_err(to_py)?.rows))
}

#[pyfunction]
pub fn lse(adjacency: Vec<Vec<f64>>, d: usize) -> PyResult<Vec<Vec<f64>>> {
    let a = matrix(&adjacency, "adjacency")?;
    Ok(rows(&rdpg::lse(&a, d).map_err(to_py)?.rows))
}

/// Chernoff information between two Gaussians. Returns `(value, t_star)`;
/// `value` is `inf` for mutually singular distributions.
#[pyfunction]
pub fn chernoff_information(
    mean0: Vec<f64>,
    cov0: Vec<Vec<f64>>,
    mean1: Vec<f64>,
    cov1: Vec<Vec<f64>>,
) -> PyResult<(f64, f64)> {
    let g0 = GaussianParams::new(DVector::from_vec(mean0), matrix(&cov0, "cov0")?).map_err(to_py)?;
    let g1 = GaussianParams::new(DVector::from_vec(mean1), matrix(&cov1, "cov1")?).map_err(to_py)?;
    let e = rdpg::gaussian_chernoff_information(&g0, &g1).map_err(to_py)?;
    Ok((e.value.to_f64(), e.t_star))
}

/// Minimum pairwise Chernoff information between the block limits of an
/// embedding, scaled by `n`.
#[pyfunction]
#[pyo3(signature = (b, pi, n, method="lse"))]
pub fn rho(b: Vec<Vec<f64>>, pi: Vec<f64>, n: usize, method: &str) -> PyResult<f64> {
    let params = block_model(b, pi)?;
    let v = match self::method(method)? {
        EmbeddingMethod::Ase => rdpg::rho_ase(&params, n),
        EmbeddingMethod::Lse => rdpg::rho_lse(&params, n),
    };
    Ok(v.map_err(to_py)?.to_f64())
}

#[pyfunction]
#[pyo3(signature = (b, pi, method="lse"))]
pub fn frobenius_limit(b: Vec<Vec<f64>>, pi: Vec<f64>, method: &str) -> PyResult<f64> {
    let params = block_model(b, pi)?;
    let f = rdpg::mixture_from_block_model(&params, params.numerical_rank()).map_err(to_py)?;
    let regime = rdpg::RhoRegime::Dense;
    match self::method(method)? {
        EmbeddingMethod::Ase => rdpg::limits::ase_frobenius_limit(&f, regime),
        EmbeddingMethod::Lse => rdpg::limits::lse_frobenius_limit(&f, regime),
    }
    .map_err(to_py)
}

#[pyfunction]
pub fn error_rate(predicted: Vec<usize>, truth: Vec<usize>, k: usize) -> PyResult<f64> {
    rdpg::error_rate(&predicted, &truth, k).map_err(to_py)
}

#[pymodule]
fn rdpg_spectral(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sample_sbm, m)?)?;
    m.add_function(wrap_pyfunction!(ase, m)?)?;
    m.add_function(wrap_pyfunction!(lse, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_information, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_limit, m)?)?;
    m.add_function(wrap_pyfunction!(error_rate, m)?)?;
    Ok(())
}
