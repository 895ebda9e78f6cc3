//! Transfer-learning PCA fits.
//!
//! * TL-PCA-P penalizes the projection distance to the leading `m` directions
//!   `Ũ_m` of a pretrained source model. The minimizer is the top-`k`
//!   eigenbasis of `M_P = (1/n) X Xᵀ + α Ũ_m Ũ_mᵀ`.
//! * TL-PCA-D penalizes the reconstruction error of the source data. The
//!   minimizer is the top-`k` eigenbasis of `M_D = (1/n) X Xᵀ + (α/ñ) X̃ X̃ᵀ`.
//!
//! Both matrices are handled through a [`PsdFactor`]:
//! `R = [X/√n, √α Ũ_m]` and `R = [X/√n, √(α/ñ) X̃]`. When the factor is
//! narrower than `d` the eigenproblem is solved on the small Gram matrix.

use nalgebra::DMatrix;

use crate::dataset::CenteredDataset;
use crate::eigen::{self, PsdFactor};
use crate::error::{bail, Result};
use crate::pca::{FitKind, Hyperparams, SubspaceModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlpcaPConfig {
    pub k: usize,
    pub alpha: f64,
    /// Number of leading source directions transferred.
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlpcaDConfig {
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        bail!(Argument, "alpha must be a finite positive number, got {alpha}");
    }
    Ok(())
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        bail!(Argument, "k must satisfy 1 <= k <= d = {d}, got {k}");
    }
    Ok(())
}

/// `‖W Wᵀ − Ũ Ũᵀ‖_F²`, evaluated on the explicit `d × d` projectors.
pub fn penalty_p(w: &DMatrix<f64>, source_m: &DMatrix<f64>) -> Result<f64> {
    if w.nrows() != source_m.nrows() {
        bail!(Dimension, "W has {} rows, source basis has {}", w.nrows(), source_m.nrows());
    }
    let diff = w * w.transpose() - source_m * source_m.transpose();
    Ok(diff.norm_squared())
}

/// `(1/ñ) ‖(I − W Wᵀ) X̃‖_F²` for centered source data.
pub fn penalty_d(w: &DMatrix<f64>, source: &CenteredDataset) -> Result<f64> {
    if w.nrows() != source.d() {
        bail!(Dimension, "W has {} rows, source data has d = {}", w.nrows(), source.d());
    }
    Ok(crate::pca::residual_energy(w, source.x()) / source.n() as f64)
}

/// `R = [X/√n | √α Ũ_m]` so that `R Rᵀ = M_P`.
pub fn build_factor_p(target: &CenteredDataset, source_basis: &DMatrix<f64>, alpha: f64) -> Result<PsdFactor> {
    check_alpha(alpha)?;
    let d = target.d();
    if source_basis.nrows() != d {
        bail!(Dimension, "source basis has {} rows, target has d = {d}", source_basis.nrows());
    }
    let m = source_basis.ncols();
    if m == 0 {
        bail!(Argument, "at least one source direction must be transferred");
    }
    let n = target.n();
    let mut r = DMatrix::zeros(d, n + m);
    r.columns_mut(0, n).copy_from(&(target.x() / (n as f64).sqrt()));
    r.columns_mut(n, m).copy_from(&(source_basis * alpha.sqrt()));
    PsdFactor::new(r)
}

/// `R = [X/√n | √(α/ñ) X̃]` so that `R Rᵀ = M_D`.
pub fn build_factor_d(target: &CenteredDataset, source: &CenteredDataset, alpha: f64) -> Result<PsdFactor> {
    check_alpha(alpha)?;
    let d = target.d();
    if source.d() != d {
        bail!(Dimension, "source has d = {}, target has d = {d}", source.d());
    }
    let n = target.n();
    let ns = source.n();
    let mut r = DMatrix::zeros(d, n + ns);
    r.columns_mut(0, n).copy_from(&(target.x() / (n as f64).sqrt()));
    r.columns_mut(n, ns).copy_from(&(source.x() * (alpha / ns as f64).sqrt()));
    PsdFactor::new(r)
}

/// TL-PCA-P: top-`k` eigenbasis of `(1/n) X Xᵀ + α Ũ_m Ũ_mᵀ`, where `Ũ_m` is the
/// first `config.m` columns of the source model.
pub fn tlpca_p_fit(
    target: &CenteredDataset,
    source_model: &SubspaceModel,
    config: &TlpcaPConfig,
) -> Result<SubspaceModel> {
    check_alpha(config.alpha)?;
    check_k(config.k, target.d())?;
    if source_model.d() != target.d() {
        bail!(Dimension, "source model has d = {}, target has d = {}", source_model.d(), target.d());
    }
    if config.m == 0 || config.m > source_model.k() {
        bail!(Argument, "m must satisfy 1 <= m <= source k = {}, got {}", source_model.k(), config.m);
    }
    let source_m = source_model.basis.columns(0, config.m).into_owned();
    let factor = build_factor_p(target, &source_m, config.alpha)?;
    let eig = eigen::top_k(&factor, config.k, config.seed)?;
    Ok(SubspaceModel::from_eigen(
        eig,
        target.mean.clone(),
        FitKind::TlpcaP,
        Some(Hyperparams { alpha: config.alpha, m: Some(config.m) }),
    ))
}

/// TL-PCA-D: top-`k` eigenbasis of `(1/n) X Xᵀ + (α/ñ) X̃ X̃ᵀ`.
pub fn tlpca_d_fit(target: &CenteredDataset, source: &CenteredDataset, config: &TlpcaDConfig) -> Result<SubspaceModel> {
    check_alpha(config.alpha)?;
    check_k(config.k, target.d())?;
    let factor = build_factor_d(target, source, config.alpha)?;
    let eig = eigen::top_k(&factor, config.k, config.seed)?;
    Ok(SubspaceModel::from_eigen(
        eig,
        target.mean.clone(),
        FitKind::TlpcaD,
        Some(Hyperparams { alpha: config.alpha, m: None }),
    ))
}
