//! Data matrices, centering, fold splitting and synthetic task generation.
//!
//! Matrices follow the `d × n` convention: each column is one example.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{bail, Result};
use crate::linalg::{derive_seed, extend_orthonormal, gaussian_matrix, rng_from_seed};

/// A `d × n` matrix of finite values, one example per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            bail!(Dimension, "data matrix must be non-empty, got {}x{}", values.nrows(), values.ncols());
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            bail!(Numeric, "non-finite entry at column-major offset {pos}");
        }
        Ok(Self { values })
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[DVector<f64>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            bail!(Dimension, "no columns given");
        };
        let d = first.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != d) {
            bail!(Dimension, "column length {} differs from {d}", bad.len());
        }
        Self::new(DMatrix::from_columns(columns))
    }

    /// Ambient dimension.
    pub fn d(&self) -> usize {
        self.values.nrows()
    }

    /// Number of examples.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.values.column(i).into_owned()
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            bail!(Argument, "cannot select zero columns");
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            bail!(Argument, "column index {bad} out of range for n = {}", self.n());
        }
        Ok(Self { values: self.values.select_columns(indices) })
    }

    pub fn transpose(&self) -> Self {
        Self { values: self.values.transpose() }
    }
}

/// A data matrix with its sample mean removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDataset {
    pub centered: DataMatrix,
    pub mean: DVector<f64>,
}

impl CenteredDataset {
    pub fn d(&self) -> usize {
        self.centered.d()
    }

    pub fn n(&self) -> usize {
        self.centered.n()
    }

    /// The centered `d × n` matrix.
    pub fn x(&self) -> &DMatrix<f64> {
        self.centered.values()
    }
}

/// Subtracts the per-coordinate sample mean from every column.
pub fn center(data: &DataMatrix) -> CenteredDataset {
    let mean = data.values().column_mean();
    let mut centered = data.values().clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    CenteredDataset { centered: DataMatrix { values: centered }, mean }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringDirection {
    Subtract,
    Add,
}

/// `x − mean` or `x + mean`.
pub fn apply_centering(x: &DVector<f64>, mean: &DVector<f64>, direction: CenteringDirection) -> Result<DVector<f64>> {
    if x.len() != mean.len() {
        bail!(Dimension, "vector length {} but mean length {}", x.len(), mean.len());
    }
    Ok(match direction {
        CenteringDirection::Subtract => x - mean,
        CenteringDirection::Add => x + mean,
    })
}

/// One train/validation split; indices are 0-based column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub folds: Vec<Fold>,
}

impl FoldSplit {
    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }
}

/// Shuffles `0..n` with `seed` and cuts it into `fold_count` contiguous
/// validation blocks; the first `n % fold_count` blocks get one extra index.
pub fn kfold_split(n: usize, fold_count: usize, seed: u64) -> Result<FoldSplit> {
    if fold_count < 2 {
        bail!(Argument, "fold count must be at least 2, got {fold_count}");
    }
    if fold_count > n {
        bail!(Argument, "fold count {fold_count} exceeds sample count {n}");
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let base = n / fold_count;
    let extra = n % fold_count;
    let mut folds = Vec::with_capacity(fold_count);
    let mut start = 0;
    for f in 0..fold_count {
        let len = base + usize::from(f < extra);
        let mut validation = order[start..start + len].to_vec();
        validation.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + len..]).copied().collect();
        train.sort_unstable();
        folds.push(Fold { train, validation });
        start += len;
    }
    Ok(FoldSplit { folds })
}

/// Parameters of the generative model `x = U z + ε`, `z ~ N(0, I_m)`,
/// `ε ~ N(0, σ² I_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub d: usize,
    pub m: usize,
    pub noise_sigma: f64,
    pub n: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.d {
            bail!(Argument, "latent dimension must satisfy 1 <= m < d, got m = {}, d = {}", self.m, self.d);
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            bail!(Argument, "noise sigma must be finite and non-negative, got {}", self.noise_sigma);
        }
        if self.n == 0 {
            bail!(Argument, "sample count must be positive");
        }
        Ok(())
    }
}

/// Seeded `d × m` matrix with orthonormal columns.
pub fn synth_basis(d: usize, m: usize, seed: u64) -> Result<DMatrix<f64>> {
    if m == 0 || m >= d {
        bail!(Argument, "basis needs 1 <= m < d, got m = {m}, d = {d}");
    }
    let mut rng = rng_from_seed(seed);
    Ok(extend_orthonormal(&DMatrix::zeros(d, 0), m, &mut rng))
}

/// Draws `spec.n` examples `basis · z + ε`.
pub fn synth_sample(basis: &DMatrix<f64>, spec: &SyntheticSpec) -> Result<DataMatrix> {
    spec.validate()?;
    if basis.nrows() != spec.d || basis.ncols() != spec.m {
        bail!(
            Dimension,
            "basis is {}x{} but spec declares d = {}, m = {}",
            basis.nrows(),
            basis.ncols(),
            spec.d,
            spec.m
        );
    }
    let mut rng = rng_from_seed(spec.seed);
    let latent = gaussian_matrix(spec.m, spec.n, &mut rng);
    let noise = gaussian_matrix(spec.d, spec.n, &mut rng);
    DataMatrix::new(basis * latent + noise * spec.noise_sigma)
}

/// A target/source pair whose latent subspaces share their leading columns.
#[derive(Debug, Clone)]
pub struct RelatedPair {
    pub target: DataMatrix,
    pub source: DataMatrix,
    pub target_basis: DMatrix<f64>,
    pub source_basis: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelatedPairSpec {
    pub d: usize,
    pub m: usize,
    pub shared: usize,
    pub n_target: usize,
    pub n_source: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Stream tags for the sub-draws of [`synth_related_pair`].
const STREAM_SHARED: u64 = 1;
const STREAM_TARGET_BASIS: u64 = 2;
const STREAM_SOURCE_BASIS: u64 = 3;
const STREAM_TARGET_SAMPLE: u64 = 4;
const STREAM_SOURCE_SAMPLE: u64 = 5;
/// Exposed so callers can draw held-out target data that no other draw uses.
pub const STREAM_TARGET_TEST: u64 = 6;

/// Builds two related tasks: both bases start with the same `shared`
/// orthonormal columns and are completed independently.
pub fn synth_related_pair(spec: &RelatedPairSpec) -> Result<RelatedPair> {
    let RelatedPairSpec { d, m, shared, n_target, n_source, noise_sigma, seed } = *spec;
    if shared == 0 || shared > m || m >= d {
        bail!(Argument, "need 1 <= shared <= m < d, got shared = {shared}, m = {m}, d = {d}");
    }
    let shared_block = synth_basis(d, shared, derive_seed(seed, STREAM_SHARED))?;
    let target_basis =
        extend_orthonormal(&shared_block, m - shared, &mut rng_from_seed(derive_seed(seed, STREAM_TARGET_BASIS)));
    let source_basis =
        extend_orthonormal(&shared_block, m - shared, &mut rng_from_seed(derive_seed(seed, STREAM_SOURCE_BASIS)));

    let target = synth_sample(
        &target_basis,
        &SyntheticSpec { d, m, noise_sigma, n: n_target, seed: derive_seed(seed, STREAM_TARGET_SAMPLE) },
    )?;
    let source = synth_sample(
        &source_basis,
        &SyntheticSpec { d, m, noise_sigma, n: n_source, seed: derive_seed(seed, STREAM_SOURCE_SAMPLE) },
    )?;
    Ok(RelatedPair { target, source, target_basis, source_basis })
}
