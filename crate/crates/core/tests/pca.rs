mod common;

use common::{anisotropic_data, frame, gaussian};
use nalgebra::DVector;
use proptest::prelude::*;
use tlpca::dataset::{center, DataMatrix};
use tlpca::evaluate::projection_distance;
use tlpca::pca::{inverse_transform, pca_fit, reconstruct, residual_energy, transform};

#[test]
fn beats_random_frames_on_train_data() {
    for instance in 0..20u64 {
        let data = center(&DataMatrix::new(gaussian(6, 12, 500 + instance)).unwrap());
        for k in 1..=4 {
            let fitted = residual_energy(&pca_fit(&data, k, 0).unwrap().basis, data.x());
            let best_random = (0..1000u64)
                .map(|t| residual_energy(&frame(6, k, instance * 10_000 + t), data.x()))
                .fold(f64::INFINITY, f64::min);
            assert!(fitted <= best_random + 1e-12, "instance {instance} k {k}: {fitted} > {best_random}");
        }
    }
}

#[test]
fn error_and_variance_forms_sum_to_total_energy() {
    for (d, n) in [(10, 40), (30, 8), (15, 15)] {
        let data = anisotropic_data(d, n, d as u64 * 7 + n as u64);
        let total = data.x().norm_squared();
        for k in [1, 3, 5] {
            let model = pca_fit(&data, k, 0).unwrap();
            let residual = residual_energy(&model.basis, data.x());
            let explained: f64 = model.eigenvalues.iter().sum::<f64>() * n as f64;
            assert!((residual + explained - total).abs() <= 1e-8 * total, "d={d} n={n} k={k}");
        }
    }
}

#[test]
fn leading_columns_are_nested() {
    let data = anisotropic_data(20, 50, 4);
    let full = pca_fit(&data, 8, 0).unwrap();
    for j in 1..=full.data_rank {
        let small = pca_fit(&data, j, 0).unwrap();
        let head = full.basis.columns(0, j).into_owned();
        assert!(projection_distance(&head, &small.basis).unwrap() <= 1e-8, "j = {j}");
    }
}

#[test]
fn train_error_is_monotone_in_k() {
    let data = anisotropic_data(25, 9, 12);
    let mut last = f64::INFINITY;
    for k in 1..=25 {
        let e = residual_energy(&pca_fit(&data, k, 3).unwrap().basis, data.x());
        assert!(e <= last + 1e-10, "k = {k}");
        last = e;
    }
    assert!(last <= 1e-10);
}

#[test]
fn rank_is_bounded_by_sample_count() {
    let data = anisotropic_data(10, 5, 1);
    let model = pca_fit(&data, 8, 0).unwrap();
    assert!(model.data_rank <= 4);
    let head = model.basis.columns(0, model.data_rank);
    let tail = model.basis.columns(model.data_rank, 8 - model.data_rank);
    assert!((head.transpose() * tail).amax() <= 1e-10);
}

#[test]
fn duplicated_samples_lower_rank_further() {
    let base = gaussian(12, 3, 9);
    let x = nalgebra::DMatrix::from_fn(12, 6, |i, j| base[(i, j % 3)]);
    let model = pca_fit(&center(&DataMatrix::new(x).unwrap()), 6, 0).unwrap();
    assert_eq!(model.data_rank, 2);
}

#[test]
fn direct_and_gram_paths_agree() {
    // n < d takes the Gram path, n >= d the direct one; same subspace either way
    let data = anisotropic_data(12, 11, 5);
    let gram_fit = pca_fit(&data, 4, 0).unwrap();
    let explicit = tlpca::eigen::top_k_direct(&(data.x() * data.x().transpose() / 11.0), 4, 0).unwrap();
    assert!(projection_distance(&gram_fit.basis, &explicit.eigenvectors).unwrap() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_properties(seed in any::<u64>(), z in proptest::collection::vec(-5.0f64..5.0, 3)) {
        let data = anisotropic_data(7, 20, seed);
        let model = pca_fit(&data, 3, 0).unwrap();
        let z = DVector::from_vec(z);
        let x = inverse_transform(&model, &z).unwrap();
        prop_assert!((transform(&model, &x).unwrap() - &z).norm() <= 1e-10);
        prop_assert!((reconstruct(&model, &x).unwrap() - &x).norm() <= 1e-10);

        let y = DVector::from_fn(7, |i, _| (i as f64 * 1.3 + seed as f64 % 7.0).sin() * 4.0);
        let once = reconstruct(&model, &y).unwrap();
        prop_assert!((reconstruct(&model, &once).unwrap() - once).norm() <= 1e-10);
        prop_assert!(transform(&model, &model.mean).unwrap().norm() == 0.0);
    }
}
