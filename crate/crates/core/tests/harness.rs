use nalgebra::DMatrix;
use proptest::prelude::*;
use rdpg::harness::{
    replicate_seed, run_clt_check, run_clustering_experiment, run_frobenius_check, Clusterer, ExperimentConfig,
    Section43Preset,
};
use rdpg::{BlockModelParams, EmbeddingMethod, RhoRegime};

fn small_config(replicates: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(BlockModelParams::example1(), vec![150], replicates, seed)
}

#[test]
fn noiseless_injection_gives_zero_residuals() {
    let mut cfg = small_config(4, 1);
    cfg.noiseless = true;
    let f = run_frobenius_check(&cfg).unwrap();
    for row in &f.rows {
        assert!(row.empirical_mean < 1e-12, "{row:?}");
    }
    let c = run_clt_check(&cfg).unwrap();
    for row in &c.rows {
        assert!(row.empirical_cov.amax() < 1e-12);
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = small_config(6, 42);
    let a = run_clustering_experiment(&cfg).unwrap();
    let b = run_clustering_experiment(&cfg).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.mean_error, y.mean_error);
        assert_eq!(x.stderr, y.stderr);
    }
    let fa = run_frobenius_check(&cfg).unwrap();
    let fb = run_frobenius_check(&cfg).unwrap();
    for (x, y) in fa.rows.iter().zip(&fb.rows) {
        assert_eq!(x.empirical_mean, y.empirical_mean);
    }
}

#[test]
fn rows_carry_counts_and_errors() {
    let mut cfg = small_config(5, 3);
    cfg.clusterers = vec![Clusterer::KMeans, Clusterer::Gmm, Clusterer::LinearOracle, Clusterer::BayesOracle];
    cfg.oracle_samples = 2000;
    let rep = run_clustering_experiment(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 2 * 4);
    for row in &rep.rows {
        assert!(row.replicates > 0);
        assert!(row.stderr.is_finite() && row.stderr >= 0.0);
        assert!((0.0..=1.0).contains(&row.mean_error));
    }
    let f = run_frobenius_check(&cfg).unwrap();
    for row in &f.rows {
        assert_eq!(row.replicates, 5);
        assert!(row.stderr.is_finite());
    }
}

#[test]
fn er_frobenius_matches_scalar_limits() {
    let p: f64 = 0.5;
    let params = BlockModelParams::new(DMatrix::from_element(1, 1, p * p), vec![1.0]).unwrap();
    let cfg = ExperimentConfig::new(params, vec![1000], 30, 9);
    let rep = run_frobenius_check(&cfg).unwrap();
    for row in &rep.rows {
        let want = match row.method {
            EmbeddingMethod::Ase => 1.0 - p * p,
            EmbeddingMethod::Lse => (1.0 - p * p) / (4.0 * p * p),
        };
        assert!((row.theoretical - want).abs() < 1e-12);
        assert!((row.ratio - 1.0).abs() < 0.15, "{row:?}");
    }
}

#[test]
fn invalid_configs_name_fields() {
    let mut cfg = small_config(1, 0);
    cfg.sparsity = 0.5;
    assert!(run_frobenius_check(&cfg).unwrap_err().to_string().contains("sparsity"));
    cfg.regime = RhoRegime::Vanishing;
    assert!(cfg.validate().is_ok());
    cfg.methods.clear();
    assert!(cfg.validate().unwrap_err().to_string().contains("methods"));
}

#[test]
fn presets_are_the_comparison_models() {
    assert_eq!(Section43Preset::ALL.len(), 4);
    let b = Section43Preset::TwoBlockA.params();
    assert!((b.block_probs()[(0, 0)] - 0.5625).abs() < 1e-15);
    assert!((b.block_probs()[(0, 1)] - 0.45).abs() < 1e-15);
    assert_eq!(Section43Preset::ThreeBlockB.n(), 1600);
    assert_eq!("three-block-a".parse::<Section43Preset>().unwrap(), Section43Preset::ThreeBlockA);
}

proptest! {
    #[test]
    fn replicate_seeds_injective(base in any::<u64>(), r1 in 0usize..1_000_000, r2 in 0usize..1_000_000, a1 in 0usize..4, a2 in 0usize..4) {
        prop_assume!((r1, a1) != (r2, a2));
        prop_assert_ne!(replicate_seed(base, r1, a1), replicate_seed(base, r2, a2));
    }
}
