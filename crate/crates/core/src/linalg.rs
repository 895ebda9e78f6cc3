//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Residual norm below which a Gaussian draw is considered degenerate and redrawn.
const DEGENERATE_DRAW: f64 = 1e-8;

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a seed with a stream tag (splitmix64 finalizer) so that independent
/// sub-draws of one seeded operation never share a stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector(len: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut out = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            out[(i, j)] = StandardNormal.sample(rng);
        }
    }
    out
}

/// Appends `extra` orthonormal columns to `base` by Gram-Schmidt on Gaussian
/// draws. The first columns of the result are `base`, bit for bit.
///
/// Callers guarantee `base.ncols() + extra <= base.nrows()` and that `base`
/// has orthonormal columns.
pub fn extend_orthonormal(base: &DMatrix<f64>, extra: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let d = base.nrows();
    let r = base.ncols();
    debug_assert!(r + extra <= d);
    let mut out = DMatrix::zeros(d, r + extra);
    out.columns_mut(0, r).copy_from(base);
    for j in r..r + extra {
        loop {
            let mut v = gaussian_vector(d, rng);
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for i in 0..j {
                    let q = out.column(i);
                    let proj = q.dot(&v);
                    v.axpy(-proj, &q, 1.0);
                }
            }
            let norm = v.norm();
            if norm >= DEGENERATE_DRAW {
                out.set_column(j, &(v / norm));
                break;
            }
        }
    }
    out
}

/// Re-orthonormalizes columns in place (two-pass modified Gram-Schmidt).
/// Returns the smallest pre-normalization residual norm encountered.
pub(crate) fn reorthonormalize(m: &mut DMatrix<f64>) -> f64 {
    let mut smallest = f64::INFINITY;
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let q = m.column(i);
                let proj = q.dot(&v);
                v.axpy(-proj, &q, 1.0);
            }
        }
        let norm = v.norm();
        smallest = smallest.min(norm);
        m.set_column(j, &(v / norm));
    }
    smallest
}

/// ‖UᵀU − I‖_F.
pub fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    (gram - DMatrix::identity(u.ncols(), u.ncols())).norm()
}

/// Flips the sign of each column so its largest-magnitude entry is positive
/// (first index wins among equal magnitudes).
pub fn normalize_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Largest absolute asymmetry `max |M − Mᵀ|`.
pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
