use pyo3::prelude::*;
use rdpg_spectral::{ase, chernoff_information, error_rate, frobenius_limit, lse, rho, sample_sbm};

fn example_b() -> Vec<Vec<f64>> {
    vec![vec![0.42, 0.42], vec![0.42, 0.5]]
}

#[test]
fn sample_and_embed() {
    let (a, labels) = sample_sbm(example_b(), vec![0.6, 0.4], 80, 1, 1.0).unwrap();
    assert_eq!(a.len(), 80);
    assert_eq!(labels.len(), 80);
    assert!(labels.iter().all(|&l| l < 2));
    for i in 0..80 {
        assert_eq!(a[i][i], 0.0);
        for j in 0..80 {
            assert_eq!(a[i][j], a[j][i]);
        }
    }
    assert_eq!(ase(a.clone(), 2).unwrap()[0].len(), 2);
    assert_eq!(lse(a, 2).unwrap().len(), 80);
}

#[test]
fn chernoff_values() {
    let i = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let (v, t) = chernoff_information(vec![0.0, 0.0], i.clone(), vec![0.0, 0.0], i.clone()).unwrap();
    assert_eq!((v, t), (0.0, 0.5));
    let (v, _) = chernoff_information(vec![0.0, 0.0], i.clone(), vec![2.0, 0.0], i).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn block_model_quantities() {
    let b = vec![vec![0.49, 0.0], vec![0.0, 0.25]];
    assert!(rho(b.clone(), vec![0.6, 0.4], 1000, "ase").unwrap().is_infinite());
    assert!(rho(b, vec![0.6, 0.4], 1000, "lse").unwrap().is_infinite());
    let p: f64 = 0.5;
    let f = frobenius_limit(vec![vec![p * p]], vec![1.0], "ase").unwrap();
    assert!((f - (1.0 - p * p)).abs() < 1e-12);
    assert_eq!(error_rate(vec![1, 1, 0], vec![0, 0, 1], 2).unwrap(), 0.0);
}

#[test]
fn errors_become_value_errors() {
    let err = lse(vec![vec![0.0, 1.0], vec![1.0]], 1).unwrap_err();
    let err2 = rho(example_b(), vec![0.6, 0.4], 100, "pca").unwrap_err();
    Python::initialize();
    Python::attach(|py| {
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        assert!(err.value(py).to_string().contains("adjacency"));
        assert!(err2.value(py).to_string().contains("pca"));
    });
}
