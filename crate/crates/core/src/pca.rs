//! Subspace models and the standard PCA fit.

use nalgebra::{DMatrix, DVector};

use crate::dataset::CenteredDataset;
use crate::eigen::{self, EigenResult, PsdFactor};
use crate::error::{bail, Result};

/// Which objective produced a [`SubspaceModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FitKind {
    Pca,
    TlpcaP,
    TlpcaD,
}

impl FitKind {
    /// Code stored in model files.
    pub fn code(self) -> u64 {
        match self {
            FitKind::Pca => 0,
            FitKind::TlpcaP => 1,
            FitKind::TlpcaD => 2,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(FitKind::Pca),
            1 => Some(FitKind::TlpcaP),
            2 => Some(FitKind::TlpcaD),
            _ => None,
        }
    }
}

/// Transfer hyperparameters recorded on a fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    /// Transferred source directions (TL-PCA-P only).
    pub m: Option<usize>,
}

/// An orthonormal `d × k` basis together with the mean used to center the
/// data it was fit on.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    pub basis: DMatrix<f64>,
    pub mean: DVector<f64>,
    /// Leading basis columns determined by the data; the rest are arbitrary
    /// completions of the orthogonal complement.
    pub data_rank: usize,
    pub fit_kind: FitKind,
    pub hyperparams: Option<Hyperparams>,
    /// Eigenvalues of the decomposed matrix at fit time (0 for completed
    /// directions). Not persisted: empty for models read from disk.
    pub eigenvalues: Vec<f64>,
}

impl SubspaceModel {
    pub fn d(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub(crate) fn from_eigen(
        eig: EigenResult,
        mean: DVector<f64>,
        fit_kind: FitKind,
        hyperparams: Option<Hyperparams>,
    ) -> Self {
        Self {
            basis: eig.eigenvectors,
            mean,
            data_rank: eig.data_rank,
            fit_kind,
            hyperparams,
            eigenvalues: eig.eigenvalues,
        }
    }

    /// The same subspace restricted to its first `j` columns.
    pub fn truncated(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.k() {
            bail!(Argument, "cannot truncate a {}-dimensional model to {j}", self.k());
        }
        Ok(Self {
            basis: self.basis.columns(0, j).into_owned(),
            mean: self.mean.clone(),
            data_rank: self.data_rank.min(j),
            fit_kind: self.fit_kind,
            hyperparams: self.hyperparams,
            eigenvalues: self.eigenvalues.iter().take(j).copied().collect(),
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.d() {
            bail!(Dimension, "vector has length {len}, model dimension is {}", self.d());
        }
        Ok(())
    }
}

/// Standard PCA: top-`k` eigenvectors of `(1/n) X Xᵀ`.
///
/// Uses the factor `X/√n`, through the Gram matrix when `n < d`. Columns past
/// the numerical rank are seeded completions (see [`eigen::complement_fill`]).
pub fn pca_fit(data: &CenteredDataset, k: usize, seed: u64) -> Result<SubspaceModel> {
    let d = data.d();
    if k == 0 || k > d {
        bail!(Argument, "k must satisfy 1 <= k <= d = {d}, got {k}");
    }
    let n = data.n() as f64;
    let factor = PsdFactor::new(data.x() / n.sqrt())?;
    let eig = if data.n() < d {
        eigen::top_k_gram(&factor, k, seed)?
    } else {
        eigen::top_k_direct(&(data.x() * data.x().transpose() / n), k, seed)?
    };
    Ok(SubspaceModel::from_eigen(eig, data.mean.clone(), FitKind::Pca, None))
}

/// Representation `Uᵀ(x − mean)`.
pub fn transform(model: &SubspaceModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    model.check_len(x.len())?;
    Ok(model.basis.tr_mul(&(x - &model.mean)))
}

/// Maps a representation back to the ambient space: `mean + U z`.
pub fn inverse_transform(model: &SubspaceModel, z: &DVector<f64>) -> Result<DVector<f64>> {
    if z.len() != model.k() {
        bail!(Dimension, "representation has length {}, model has k = {}", z.len(), model.k());
    }
    Ok(&model.mean + &model.basis * z)
}

/// `mean + U Uᵀ (x − mean)`.
pub fn reconstruct(model: &SubspaceModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    let z = transform(model, x)?;
    inverse_transform(model, &z)
}

/// Sum of squared projection residuals `‖(I − U Uᵀ) X‖_F²` of centered data.
pub fn residual_energy(basis: &DMatrix<f64>, centered: &DMatrix<f64>) -> f64 {
    let coeffs = basis.tr_mul(centered);
    (centered - basis * coeffs).norm_squared()
}
