#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use tlpca::dataset::{center, CenteredDataset, DataMatrix};
use tlpca::linalg::{gaussian_matrix, rng_from_seed};

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    gaussian_matrix(rows, cols, &mut rng_from_seed(seed))
}

/// Random `d × k` frame with orthonormal columns (k may equal d).
pub fn frame(d: usize, k: usize, seed: u64) -> DMatrix<f64> {
    tlpca::eigen::complement_fill(&DMatrix::zeros(d, 0), k, seed).unwrap()
}

/// Gaussian data with a distinct, decaying per-coordinate scale, rotated.
pub fn anisotropic_data(d: usize, n: usize, seed: u64) -> CenteredDataset {
    let rot = frame(d, d, seed ^ 0xABCD);
    let scales = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| 3.0 * 0.7f64.powi(i as i32)));
    let x = rot * scales * gaussian(d, n, seed);
    center(&DataMatrix::new(x).unwrap())
}

/// `(1/√2)‖U Uᵀ − V Vᵀ‖_F` written out entry by entry.
pub fn projector_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let d = u.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let pu: f64 = (0..u.ncols()).map(|c| u[(i, c)] * u[(j, c)]).sum();
            let pv: f64 = (0..v.ncols()).map(|c| v[(i, c)] * v[(j, c)]).sum();
            acc += (pu - pv).powi(2);
        }
    }
    (acc / 2.0).sqrt()
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
