mod common;

use common::{anisotropic_data, frame, sorted_desc};
use nalgebra::{DMatrix, SymmetricEigen};
use tlpca::dataset::CenteredDataset;
use tlpca::eigen::top_k_direct;
use tlpca::evaluate::projection_distance;
use tlpca::pca::{pca_fit, residual_energy};
use tlpca::tlpca::{
    build_factor_d, build_factor_p, penalty_d, penalty_p, tlpca_d_fit, tlpca_p_fit, TlpcaDConfig, TlpcaPConfig,
};

fn explicit_mp(target: &CenteredDataset, u: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let n = target.n() as f64;
    target.x() * target.x().transpose() / n + u * u.transpose() * alpha
}

fn explicit_md(target: &CenteredDataset, source: &CenteredDataset, alpha: f64) -> DMatrix<f64> {
    let n = target.n() as f64;
    let ns = source.n() as f64;
    target.x() * target.x().transpose() / n + source.x() * source.x().transpose() * (alpha / ns)
}

fn trace_form(w: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    (w.transpose() * m * w).trace()
}

fn top_eigen_sum(m: &DMatrix<f64>, k: usize) -> f64 {
    sorted_desc(SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()).iter().take(k).sum()
}

#[test]
fn projection_penalty_identity() {
    for t in 0..50u64 {
        let (d, k, m) = (12, 1 + (t as usize % 5), 1 + (t as usize % 3));
        let w = frame(d, k, t);
        let u = frame(d, m, 1000 + t);
        let direct = penalty_p(&w, &u).unwrap();
        let identity = (k + m) as f64 - 2.0 * (w.transpose() * &u).norm_squared();
        assert!((direct - identity).abs() <= 1e-10, "trial {t}");
    }
}

#[test]
fn data_penalty_trace_identity() {
    let source = anisotropic_data(15, 30, 2);
    for t in 0..20u64 {
        let w = frame(15, 4, t);
        let ns = source.n() as f64;
        let rhs = source.x().norm_squared() / ns - (w.transpose() * source.x()).norm_squared() / ns;
        assert!((penalty_d(&w, &source).unwrap() - rhs).abs() <= 1e-10);
    }
}

#[test]
fn penalized_and_trace_objectives_differ_by_constant_p() {
    let target = anisotropic_data(10, 6, 3);
    let u = frame(10, 3, 44);
    let (alpha, k) = (2.5, 4);
    let mp = explicit_mp(&target, &u, alpha);
    let n = target.n() as f64;
    let offsets: Vec<f64> = (0..100u64)
        .map(|t| {
            let w = frame(10, k, 7000 + t);
            let minimized = residual_energy(&w, target.x()) / n + alpha / 2.0 * penalty_p(&w, &u).unwrap();
            minimized - (-trace_form(&w, &mp))
        })
        .collect();
    let expected = target.x().norm_squared() / n + alpha * (k + 3) as f64 / 2.0;
    for o in &offsets {
        assert!((o - offsets[0]).abs() <= 1e-8);
        assert!((o - expected).abs() <= 1e-8);
    }
}

#[test]
fn penalized_and_trace_objectives_differ_by_constant_d() {
    let target = anisotropic_data(10, 6, 5);
    let source = anisotropic_data(10, 40, 6);
    let (alpha, k) = (0.7, 3);
    let md = explicit_md(&target, &source, alpha);
    let n = target.n() as f64;
    let offsets: Vec<f64> = (0..100u64)
        .map(|t| {
            let w = frame(10, k, 9000 + t);
            let minimized = residual_energy(&w, target.x()) / n + alpha * penalty_d(&w, &source).unwrap();
            minimized + trace_form(&w, &md)
        })
        .collect();
    for o in &offsets {
        assert!((o - offsets[0]).abs() <= 1e-8);
    }
}

#[test]
fn factors_reproduce_explicit_matrices() {
    for seed in 0..5u64 {
        let target = anisotropic_data(14, 5, seed);
        let source = anisotropic_data(14, 9, seed + 50);
        let u = frame(14, 4, seed + 90);
        let fp = build_factor_p(&target, &u, 3.0).unwrap().outer();
        let mp = explicit_mp(&target, &u, 3.0);
        assert!((fp - &mp).amax() <= 1e-12 * mp.amax());
        let fd = build_factor_d(&target, &source, 0.4).unwrap();
        assert_eq!(fd.width(), 5 + 9);
        let md = explicit_md(&target, &source, 0.4);
        assert!((fd.outer() - &md).amax() <= 1e-12 * md.amax());
    }
}

#[test]
fn vanishing_alpha_recovers_pca() {
    let target = anisotropic_data(30, 10, 1);
    let source = anisotropic_data(30, 60, 2);
    let source_model = pca_fit(&source, 9, 0).unwrap();
    for k in [2, 5, 9] {
        let plain = pca_fit(&target, k, 0).unwrap();
        let p = tlpca_p_fit(&target, &source_model, &TlpcaPConfig { k, alpha: 1e-12, m: 9, seed: 0 }).unwrap();
        let d = tlpca_d_fit(&target, &source, &TlpcaDConfig { k, alpha: 1e-12, seed: 0 }).unwrap();
        assert!(projection_distance(&p.basis, &plain.basis).unwrap() <= 1e-4, "P, k = {k}");
        assert!(projection_distance(&d.basis, &plain.basis).unwrap() <= 1e-4, "D, k = {k}");
    }
}

#[test]
fn huge_alpha_recovers_source() {
    let target = anisotropic_data(30, 10, 3);
    let source = anisotropic_data(30, 200, 4);
    let k = 5;
    let source_model = pca_fit(&source, k, 0).unwrap();
    let p = tlpca_p_fit(&target, &source_model, &TlpcaPConfig { k, alpha: 1e9, m: k, seed: 0 }).unwrap();
    assert!(projection_distance(&p.basis, &source_model.basis).unwrap() <= 1e-3);
    let d = tlpca_d_fit(&target, &source, &TlpcaDConfig { k, alpha: 1e9, seed: 0 }).unwrap();
    assert!(projection_distance(&d.basis, &source_model.basis).unwrap() <= 1e-3);
}

#[test]
fn identical_tasks_scale_the_covariance() {
    let data = anisotropic_data(16, 40, 8);
    let fit = tlpca_d_fit(&data, &data, &TlpcaDConfig { k: 5, alpha: 1.0, seed: 0 }).unwrap();
    let plain = pca_fit(&data, 5, 0).unwrap();
    assert!(projection_distance(&fit.basis, &plain.basis).unwrap() <= 1e-8);
    for (a, b) in fit.eigenvalues.iter().zip(&plain.eigenvalues) {
        assert!((a - 2.0 * b).abs() <= 1e-10 * a);
    }
}

#[test]
fn overparameterized_fit_satisfies_residual_contract() {
    let target = anisotropic_data(30, 6, 11);
    let source = pca_fit(&anisotropic_data(30, 80, 12), 10, 0).unwrap();
    let fit = tlpca_p_fit(&target, &source, &TlpcaPConfig { k: 10, alpha: 1.0, m: 10, seed: 0 }).unwrap();
    assert_eq!(fit.data_rank, 10);
    let mp = explicit_mp(&target, &source.basis, 1.0);
    let scale = fit.eigenvalues[0].max(1.0);
    for i in 0..10 {
        let v = fit.basis.column(i);
        assert!((&mp * v - v * fit.eigenvalues[i]).norm() <= 1e-7 * scale, "direction {i}");
    }
    let oracle = top_k_direct(&mp, 10, 0).unwrap();
    assert!(projection_distance(&fit.basis, &oracle.eigenvectors).unwrap() <= 1e-6);
}

#[test]
fn fitted_basis_attains_the_trace_maximum() {
    let target = anisotropic_data(20, 7, 13);
    let source_data = anisotropic_data(20, 50, 14);
    let source = pca_fit(&source_data, 6, 0).unwrap();
    for (alpha, m, k) in [(0.5, 3, 4), (5.0, 6, 9), (0.01, 1, 2)] {
        let fit = tlpca_p_fit(&target, &source, &TlpcaPConfig { k, alpha, m, seed: 0 }).unwrap();
        let mp = explicit_mp(&target, &source.basis.columns(0, m).into_owned(), alpha);
        assert!((trace_form(&fit.basis, &mp) - top_eigen_sum(&mp, k)).abs() <= 1e-8);
    }
    let fit = tlpca_d_fit(&target, &source_data, &TlpcaDConfig { k: 9, alpha: 2.0, seed: 0 }).unwrap();
    let md = explicit_md(&target, &source_data, 2.0);
    assert!((trace_form(&fit.basis, &md) - top_eigen_sum(&md, 9)).abs() <= 1e-8);
}

#[test]
fn transfer_raises_data_rank() {
    let target = anisotropic_data(40, 6, 15);
    let source_data = anisotropic_data(40, 20, 16);
    let source = pca_fit(&source_data, 8, 0).unwrap();
    let k = 10;
    let plain = pca_fit(&target, k, 0).unwrap();
    let p = tlpca_p_fit(&target, &source, &TlpcaPConfig { k, alpha: 1.0, m: 8, seed: 0 }).unwrap();
    let d = tlpca_d_fit(&target, &source_data, &TlpcaDConfig { k, alpha: 1.0, seed: 0 }).unwrap();
    assert_eq!(plain.data_rank, 5);
    assert!(p.data_rank > plain.data_rank);
    assert!(d.data_rank > plain.data_rank);
}

#[test]
fn alignment_with_source_grows_with_alpha() {
    let target = anisotropic_data(25, 12, 17);
    let source = pca_fit(&anisotropic_data(25, 100, 18), 6, 0).unwrap();
    let dists: Vec<f64> = [0.01, 0.1, 1.0, 10.0, 100.0, 1e4]
        .iter()
        .map(|&alpha| {
            let fit = tlpca_p_fit(&target, &source, &TlpcaPConfig { k: 6, alpha, m: 6, seed: 0 }).unwrap();
            projection_distance(&fit.basis, &source.basis).unwrap()
        })
        .collect();
    for w in dists.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{dists:?}");
    }
}

#[test]
fn gram_and_direct_routes_agree_for_both_fits() {
    let target = anisotropic_data(60, 8, 19);
    let source_data = anisotropic_data(60, 20, 20);
    let source = pca_fit(&source_data, 10, 0).unwrap();
    let p = tlpca_p_fit(&target, &source, &TlpcaPConfig { k: 12, alpha: 3.0, m: 10, seed: 0 }).unwrap();
    let p_direct = top_k_direct(&explicit_mp(&target, &source.basis, 3.0), 12, 0).unwrap();
    assert!(projection_distance(&p.basis, &p_direct.eigenvectors).unwrap() <= 1e-6);
    let d = tlpca_d_fit(&target, &source_data, &TlpcaDConfig { k: 12, alpha: 3.0, seed: 0 }).unwrap();
    let d_direct = top_k_direct(&explicit_md(&target, &source_data, 3.0), 12, 0).unwrap();
    assert!(projection_distance(&d.basis, &d_direct.eigenvectors).unwrap() <= 1e-6);
}
