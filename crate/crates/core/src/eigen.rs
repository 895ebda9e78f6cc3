//! Top-k eigenpairs of PSD matrices.
//!
//! Two routes are provided. [`top_k_direct`] decomposes an explicit `d × d`
//! matrix. [`top_k_gram`] takes a factor `R` with `M = R Rᵀ` and decomposes the
//! `r × r` Gram matrix `Q = RᵀR` instead: if `Q ρ = λ ρ` then
//! `M (R ρ) = R Q ρ = λ (R ρ)`, so every nonzero eigenpair of `M` is recovered
//! as `(λ, R ρ / ‖R ρ‖)` at `O(r³ + d r²)` cost.
//!
//! Directions with eigenvalue at or below the zero tolerance
//! (`1e-10 · max(trace M, 1)`) carry no information about the data; both routes
//! replace them with a seeded basis of the orthogonal complement so the output
//! always has exactly `k` orthonormal columns.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{bail, Result};
use crate::linalg::{extend_orthonormal, max_asymmetry, normalize_signs, reorthonormalize, rng_from_seed, symmetrize};

/// Relative zero-eigenvalue threshold, scaled by `max(trace, 1)`.
pub const ZERO_EIGENVALUE_REL: f64 = 1e-10;
/// Relative asymmetry accepted by [`top_k_direct`].
pub const SYMMETRY_REL: f64 = 1e-9;

/// A `d × r` factor `R` standing for the PSD matrix `R Rᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor {
    r: DMatrix<f64>,
}

impl PsdFactor {
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        if r.nrows() == 0 {
            bail!(Dimension, "factor must have at least one row");
        }
        if r.iter().any(|v| !v.is_finite()) {
            bail!(Numeric, "factor has non-finite entries");
        }
        Ok(Self { r })
    }

    pub fn d(&self) -> usize {
        self.r.nrows()
    }

    /// Factor width `r`.
    pub fn width(&self) -> usize {
        self.r.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `R Rᵀ`, formed explicitly.
    pub fn outer(&self) -> DMatrix<f64> {
        &self.r * self.r.transpose()
    }

    /// `RᵀR`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.r.transpose() * &self.r
    }

    /// `trace(R Rᵀ) = ‖R‖_F²`.
    pub fn trace(&self) -> f64 {
        self.r.norm_squared()
    }

    /// True when the Gram route is the cheaper one (`r < d`).
    pub fn prefers_gram(&self) -> bool {
        self.width() < self.d()
    }
}

/// Leading eigenpairs of a PSD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// `k` values, non-increasing. Filled (zero-eigenvalue) directions report 0.
    pub eigenvalues: Vec<f64>,
    /// `d × k`, orthonormal columns.
    pub eigenvectors: DMatrix<f64>,
    /// Number of leading columns whose eigenvalue exceeds the zero tolerance.
    pub data_rank: usize,
}

impl EigenResult {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn zero_tolerance(trace: f64) -> f64 {
    ZERO_EIGENVALUE_REL * trace.max(1.0)
}

/// (eigenvalue, column index) pairs, largest first.
type EigenOrder = Vec<(f64, usize)>;

/// Eigen-decomposes a symmetric matrix and returns (value, column index) pairs
/// sorted by decreasing value; equal values keep the solver's order.
fn sorted_decomposition(m: DMatrix<f64>) -> Result<(EigenOrder, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| crate::Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<(f64, usize)> = eig.eigenvalues.iter().copied().zip(0..).collect();
    if order.iter().any(|(v, _)| !v.is_finite()) {
        bail!(Numeric, "eigensolver produced non-finite eigenvalues");
    }
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok((order, eig.eigenvectors))
}

fn finish(retained: DMatrix<f64>, mut values: Vec<f64>, k: usize, fill_seed: u64) -> Result<EigenResult> {
    let data_rank = retained.ncols();
    let mut eigenvectors = retained;
    normalize_signs(&mut eigenvectors);
    if data_rank < k {
        eigenvectors = complement_fill(&eigenvectors, k, fill_seed)?;
        values.resize(k, 0.0);
    }
    Ok(EigenResult { eigenvalues: values, eigenvectors, data_rank })
}

/// Top-`k` eigenpairs of an explicit symmetric PSD matrix.
///
/// The matrix is symmetrized as `(M + Mᵀ)/2` before decomposition.
/// Directions whose eigenvalue is at or below the zero tolerance are replaced
/// by [`complement_fill`] with `fill_seed`.
pub fn top_k_direct(m: &DMatrix<f64>, k: usize, fill_seed: u64) -> Result<EigenResult> {
    let d = m.nrows();
    if m.ncols() != d {
        bail!(Dimension, "matrix must be square, got {}x{}", d, m.ncols());
    }
    if k == 0 || k > d {
        bail!(Argument, "k must satisfy 1 <= k <= d = {d}, got {k}");
    }
    if m.iter().any(|v| !v.is_finite()) {
        bail!(Numeric, "matrix has non-finite entries");
    }
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_REL * scale {
        bail!(Numeric, "matrix is not symmetric (max asymmetry {asym:e})");
    }
    let tol = zero_tolerance(m.trace());
    let (order, vectors) = sorted_decomposition(symmetrize(m))?;

    let kept: Vec<&(f64, usize)> = order.iter().take(k).take_while(|(v, _)| *v > tol).collect();
    let mut retained = DMatrix::zeros(d, kept.len());
    for (j, (_, src)) in kept.iter().enumerate() {
        retained.set_column(j, &vectors.column(*src));
    }
    let values = kept.iter().map(|(v, _)| *v).collect();
    finish(retained, values, k, fill_seed)
}

/// Top-`k` eigenpairs of `R Rᵀ` computed through the Gram matrix `RᵀR`.
///
/// Agrees with `top_k_direct(R Rᵀ, k)` up to the sign rule and the choice of
/// basis inside repeated eigenvalues.
pub fn top_k_gram(factor: &PsdFactor, k: usize, fill_seed: u64) -> Result<EigenResult> {
    let d = factor.d();
    if k == 0 || k > d {
        bail!(Argument, "k must satisfy 1 <= k <= d = {d}, got {k}");
    }
    let r = factor.matrix();
    let tol = zero_tolerance(factor.trace());
    let (order, rhos) = sorted_decomposition(symmetrize(&factor.gram()))?;

    let kept: Vec<&(f64, usize)> = order.iter().take(k).take_while(|(v, _)| *v > tol).collect();
    let mut retained = DMatrix::zeros(d, kept.len());
    for (j, (_, src)) in kept.iter().enumerate() {
        let mapped = r * rhos.column(*src);
        let norm = mapped.norm();
        if norm == 0.0 || !norm.is_finite() {
            bail!(Numeric, "mapped eigenvector vanished");
        }
        retained.set_column(j, &(mapped / norm));
    }
    // Rρ loses orthogonality in proportion to sqrt(λ₁/λ) for small λ; one pass
    // of Gram-Schmidt restores it without moving the spans measurably.
    if retained.ncols() > 0 && reorthonormalize(&mut retained) < 1e-6 {
        bail!(Numeric, "mapped eigenvectors are numerically dependent");
    }
    let values = kept.iter().map(|(v, _)| *v).collect();
    finish(retained, values, k, fill_seed)
}

/// Routes to [`top_k_gram`] when the factor is thinner than the ambient
/// dimension and to [`top_k_direct`] on the formed matrix otherwise.
pub fn top_k(factor: &PsdFactor, k: usize, fill_seed: u64) -> Result<EigenResult> {
    if factor.prefers_gram() {
        top_k_gram(factor, k, fill_seed)
    } else {
        top_k_direct(&factor.outer(), k, fill_seed)
    }
}

/// Extends the orthonormal columns of `v` to `k` columns with a seeded
/// orthonormal basis of part of the orthogonal complement of `span(v)`.
pub fn complement_fill(v: &DMatrix<f64>, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    let d = v.nrows();
    let r = v.ncols();
    if k > d {
        bail!(Argument, "cannot fill {k} orthonormal columns in dimension {d}");
    }
    if r > k {
        bail!(Argument, "basis already has {r} columns, more than k = {k}");
    }
    if r == k {
        return Ok(v.clone());
    }
    Ok(extend_orthonormal(v, k - r, &mut rng_from_seed(seed)))
}
