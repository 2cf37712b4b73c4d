use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use rdpg::embed::{embed, NegativeEigenvalues};
use rdpg::model::seeded_rng;
use rdpg::{
    ase, lse, mixture_from_block_model, normalized_laplacian, probability_matrix, procrustes_align, sample_graph,
    sample_latents, symmetric_eig_top, tilde_latents, BlockModelParams, EigenOrder, EmbeddingMethod,
    MixtureOfPointMasses,
};

fn gaussian_matrix(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = seeded_rng(seed, 9);
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(d, d, seed).qr().q()
}

#[test]
fn complete_graph_laplacian() {
    let a = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
    let l = normalized_laplacian(&a).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((l[(i, j)] - if i == j { 0.0 } else { 0.5 }).abs() < 1e-15);
        }
    }
}

#[test]
fn laplacian_scale_invariance() {
    let g = gaussian_matrix(8, 8, 1).abs();
    let m = &g * g.transpose();
    let l1 = normalized_laplacian(&m).unwrap();
    let l7 = normalized_laplacian(&(m * 7.0)).unwrap();
    assert!((l1 - l7).amax() < 1e-14);
}

#[test]
fn two_block_laplacian_second_eigenvalue() {
    let (alpha, gamma, beta) = (0.42, 0.3, 0.5);
    let (n1, n2) = (60, 40);
    let n = (n1 + n2) as f64;
    let (p1, p2) = (n1 as f64 / n, n2 as f64 / n);
    let block = |i: usize| usize::from(i >= n1);
    let b = [[alpha, gamma], [gamma, beta]];
    let p = DMatrix::from_fn(n1 + n2, n1 + n2, |i, j| b[block(i)][block(j)]);
    let ev = symmetric_eig_top(&normalized_laplacian(&p).unwrap(), 2, EigenOrder::ByValue).unwrap();
    let mu1 = p1 * alpha + p2 * gamma;
    let mu2 = p1 * gamma + p2 * beta;
    let lambda2 = p1 * p2 * (alpha * beta - gamma * gamma) / (mu1 * mu2);
    assert!((ev.values[0] - 1.0).abs() < 1e-12);
    assert!((ev.values[1] - lambda2).abs() < 1e-12);
}

#[test]
fn eigen_examples() {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0, 1.0]));
    assert_eq!(symmetric_eig_top(&m, 2, EigenOrder::ByMagnitude).unwrap().values, vec![-5.0, 3.0]);

    let id = DMatrix::<f64>::identity(4, 4);
    let e = symmetric_eig_top(&id, 2, EigenOrder::ByValue).unwrap();
    assert_eq!(e.values, vec![1.0, 1.0]);
    assert!((&id * &e.vectors - &e.vectors).amax() < 1e-10);

    let g = gaussian_matrix(50, 50, 2);
    let m = &g + g.transpose();
    let e = symmetric_eig_top(&m, 50, EigenOrder::ByValue).unwrap();
    let recon = &e.vectors * DMatrix::from_diagonal(&DVector::from_vec(e.values.clone())) * e.vectors.transpose();
    assert!((recon - m).amax() < 1e-8);
}

fn noiseless_setup(seed: u64, n: usize) -> (DMatrix<f64>, f64) {
    let params = BlockModelParams::example1();
    let f = mixture_from_block_model(&params, 2).unwrap();
    (sample_latents(&f, n, seed).unwrap().0, 0.6)
}

#[test]
fn noiseless_ase_recovers_scaled_latents() {
    let (x, rho) = noiseless_setup(4, 150);
    // Exact rank-d input: rho X X^T including the diagonal.
    let p = &x * x.transpose() * rho;
    let e = ase(&p, 2).unwrap();
    let target = &x * rho.sqrt();
    let al = procrustes_align(&e.rows, &target).unwrap();
    assert!(al.residual_frobenius < 1e-8, "{}", al.residual_frobenius);
}

#[test]
fn noiseless_lse_recovers_tilde_latents() {
    let (x, rho) = noiseless_setup(5, 150);
    let p = &x * x.transpose() * rho;
    let e = lse(&p, 2).unwrap();
    let al = procrustes_align(&e.rows, &tilde_latents(&x).unwrap()).unwrap();
    assert!(al.residual_frobenius < 1e-8, "{}", al.residual_frobenius);
}

#[test]
fn er_ase_rows_concentrate_at_p() {
    let n = 1000;
    let p = 0.7;
    let a = sample_graph(&DMatrix::from_element(n, 1, p), 1.0, 6).unwrap();
    let e = ase(&a, 1).unwrap();
    let mean = e.rows.sum() / n as f64;
    assert!((mean - p).abs() < 5.0 / (n as f64).sqrt());
}

#[test]
fn two_block_ase_clusters() {
    let n = 2000;
    let params = BlockModelParams::two_block(0.75, 0.6, vec![0.6, 0.4]).unwrap();
    let f = mixture_from_block_model(&params, 1).unwrap();
    let (x, labels) = sample_latents(&f, n, 7).unwrap();
    let a = sample_graph(&x, 1.0, 7).unwrap();
    let e = ase(&a, 1).unwrap();
    let w = procrustes_align(&e.rows, &x).unwrap();
    let y = w.apply(&e.rows);
    for (k, centre) in [(0, 0.75), (1, 0.6)] {
        let rows: Vec<f64> = (0..n).filter(|&i| labels[i] == k).map(|i| y[(i, 0)]).collect();
        let mean = rows.iter().sum::<f64>() / rows.len() as f64;
        assert!((mean - centre).abs() < 0.02, "block {k}: {mean}");
    }
}

#[test]
fn er_lse_rows_near_inverse_sqrt_n() {
    let n = 1000;
    let a = sample_graph(&DMatrix::from_element(n, 1, 0.6), 1.0, 8).unwrap();
    let e = lse(&a, 1).unwrap();
    let target = 1.0 / (n as f64).sqrt();
    let max_dev = e.rows.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
    assert!(max_dev < 0.2 * target, "{max_dev}");
    let e2 = lse(&(a * 2.0), 1).unwrap();
    assert!((e2.rows - e.rows).amax() < 1e-12);
}

#[test]
fn procrustes_exact_rotation() {
    let x = gaussian_matrix(30, 3, 10);
    let r = random_orthogonal(3, 11);
    let al = procrustes_align(&(&x * &r), &x).unwrap();
    assert!((&al.rotation - r.transpose()).amax() < 1e-10);
    assert!(al.residual_frobenius < 1e-10);
    let same = procrustes_align(&x, &x).unwrap();
    assert!((same.rotation - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    assert!(same.residual_frobenius < 1e-12);
}

#[test]
fn procrustes_is_optimal() {
    let y = gaussian_matrix(25, 3, 12);
    let x = gaussian_matrix(25, 3, 13);
    let al = procrustes_align(&y, &x).unwrap();
    for s in 0..100 {
        let q = random_orthogonal(3, 100 + s);
        assert!(al.residual_frobenius <= (&y * q - &x).norm() + 1e-12);
    }
}

#[test]
fn tilde_latent_examples() {
    let n = 10;
    let t = tilde_latents(&DMatrix::from_element(n, 1, 0.3)).unwrap();
    assert!(t.iter().all(|v| (v - 1.0 / (n as f64).sqrt()).abs() < 1e-15));

    let (p, q) = (0.75, 0.6);
    let (n1, n2) = (7usize, 5usize);
    let x = DMatrix::from_fn(n1 + n2, 1, |i, _| if i < n1 { p } else { q });
    let t = tilde_latents(&x).unwrap();
    let want = p / (n1 as f64 * p * p + n2 as f64 * p * q).sqrt();
    assert!((t[(0, 0)] - want).abs() < 1e-15);

    let x = gaussian_matrix(9, 2, 14).abs();
    assert!((tilde_latents(&(&x * 3.5)).unwrap() - tilde_latents(&x).unwrap()).amax() < 1e-14);
}

#[test]
fn ase_reject_and_magnitude_policies() {
    // Disassortative two-block graph: the top eigenvalues include a negative one.
    let b = DMatrix::from_row_slice(2, 2, &[0.1, 0.9, 0.9, 0.1]);
    let p = DMatrix::from_fn(40, 40, |i, j| b[(usize::from(i >= 20), usize::from(j >= 20))]);
    assert!(ase(&p, 2).is_err());
    let e = rdpg::embed::ase_with(&p, 2, NegativeEigenvalues::Magnitude).unwrap();
    assert!(e.eigenvalues[1] < 0.0);
    assert_eq!(embed(&p, 2, EmbeddingMethod::Ase).unwrap().rows, e.rows);
}

#[test]
fn laplacian_concentration_diagnostic() {
    let n = 2000;
    let f = MixtureOfPointMasses::new(vec![0.6, 0.4], DMatrix::from_row_slice(2, 1, &[0.8, 0.5])).unwrap();
    let mut scaled = Vec::new();
    for seed in 0..20 {
        let (x, _) = sample_latents(&f, n, seed).unwrap();
        let p = probability_matrix(&x, 1.0).unwrap();
        let a = sample_graph(&x, 1.0, seed).unwrap();
        let diff = normalized_laplacian(&a).unwrap() - normalized_laplacian(&p).unwrap();
        let norm = symmetric_eig_top(&diff, 1, EigenOrder::ByMagnitude).unwrap().values[0].abs();
        let min_deg = p.row_iter().map(|r| r.sum()).fold(f64::INFINITY, f64::min);
        scaled.push(norm * min_deg.sqrt());
    }
    scaled.sort_by(f64::total_cmp);
    let median = 0.5 * (scaled[9] + scaled[10]);
    assert!(median <= 10.0, "{median}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_spectrum_in_unit_interval(seed in any::<u64>()) {
        let f = MixtureOfPointMasses::new(vec![0.5, 0.5], DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.1, 0.6])).unwrap();
        let (x, _) = sample_latents(&f, 40, seed).unwrap();
        let a = sample_graph(&x, 1.0, seed).unwrap();
        if let Ok(l) = normalized_laplacian(&a) {
            for v in l.symmetric_eigenvalues().iter() {
                prop_assert!(v.abs() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn procrustes_rotation_orthogonal(seed in any::<u64>(), d in 1usize..5) {
        let y = gaussian_matrix(20, d, seed);
        let x = gaussian_matrix(20, d, seed ^ 1);
        let w = procrustes_align(&y, &x).unwrap().rotation;
        prop_assert!((w.transpose() * &w - DMatrix::<f64>::identity(d, d)).amax() < 1e-10);
    }

    #[test]
    fn embeddings_permutation_equivariant(seed in any::<u64>()) {
        let n = 30;
        let f = MixtureOfPointMasses::new(vec![0.5, 0.5], DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.7])).unwrap();
        let (x, _) = sample_latents(&f, n, seed).unwrap();
        let a = sample_graph(&x, 1.0, seed).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (7 * i + 3) % n).collect();
        let ap = DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        for method in [EmbeddingMethod::Ase, EmbeddingMethod::Lse] {
            let (Ok(e), Ok(ep)) = (embed(&a, 2, method), embed(&ap, 2, method)) else { continue };
            // Compare up to the orthogonal ambiguity of the eigenbasis.
            let moved = DMatrix::from_fn(n, 2, |i, j| e.rows[(perm[i], j)]);
            let al = procrustes_align(&ep.rows, &moved).unwrap();
            prop_assert!(al.residual_frobenius < 1e-8);
        }
    }
}
