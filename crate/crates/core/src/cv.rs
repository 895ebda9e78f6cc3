//! K-fold cross-validation over transfer hyperparameters.
//!
//! Only the target is folded. Each fold-train block is centered with its own
//! mean, fit together with the full source, and scored on the fold-validation
//! block under the fold-train mean.

use nalgebra::DVector;

use crate::dataset::{center, kfold_split, CenteredDataset, DataMatrix, Fold};
use crate::error::{bail, Result};
use crate::evaluate::dataset_error;
use crate::io::fmt_fraction;
use crate::pca::SubspaceModel;
use crate::tlpca::{tlpca_d_fit, tlpca_p_fit, TlpcaDConfig, TlpcaPConfig};

pub const DEFAULT_ALPHAS: [f64; 8] = [0.01, 0.1, 1.0, 5.0, 10.0, 50.0, 100.0, 1000.0];
pub const DEFAULT_M_FRACTIONS: [f64; 4] = [0.2, 0.5, 0.8, 1.0];
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct CvGrid {
    pub alphas: Vec<f64>,
    /// Fractions of `k` to transfer; TL-PCA-P only.
    pub m_fractions: Option<Vec<f64>>,
    pub fold_count: usize,
    pub seed: u64,
}

impl CvGrid {
    /// Default alpha grid for TL-PCA-D.
    pub fn default_d(seed: u64) -> Self {
        Self { alphas: DEFAULT_ALPHAS.to_vec(), m_fractions: None, fold_count: DEFAULT_FOLDS, seed }
    }

    /// Default joint (alpha, m) grid for TL-PCA-P.
    pub fn default_p(seed: u64) -> Self {
        Self { m_fractions: Some(DEFAULT_M_FRACTIONS.to_vec()), ..Self::default_d(seed) }
    }

    fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            bail!(Argument, "alpha grid is empty");
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            bail!(Argument, "alpha grid values must be positive, got {a}");
        }
        if let Some(fr) = &self.m_fractions {
            if fr.is_empty() {
                bail!(Argument, "m fraction grid is empty");
            }
            if let Some(f) = fr.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                bail!(Argument, "m fractions must lie in (0, 1], got {f}");
            }
        }
        Ok(())
    }
}

/// Distinct `m = ⌈f·k⌉` values clamped to `[1, source_k]`, ascending.
pub fn m_values(k: usize, fractions: &[f64], source_k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = fractions
        .iter()
        .map(|f| {
            // shave representation error so that e.g. 0.2·15 = 3.0000000000000004 rounds to 3
            let m = (f * k as f64 - 1e-9).ceil().max(1.0) as usize;
            m.clamp(1, source_k.max(1))
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub alpha: f64,
    pub m: Option<usize>,
    pub mean_validation_error: f64,
    pub fold_errors: Vec<f64>,
}

/// A selected hyperparameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvChoice {
    pub alpha: f64,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvTable {
    /// Sorted by `(alpha, m)`.
    pub rows: Vec<CvRow>,
    pub selected: CvChoice,
}

impl CvTable {
    fn assemble(mut rows: Vec<CvRow>) -> Self {
        rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.m.cmp(&b.m)));
        // first strict minimum in canonical order: smallest alpha, then smallest m
        let mut best = 0;
        for (i, row) in rows.iter().enumerate() {
            if row.mean_validation_error < rows[best].mean_validation_error {
                best = i;
            }
        }
        let selected = CvChoice { alpha: rows[best].alpha, m: rows[best].m };
        Self { rows, selected }
    }

    /// `alpha,m,mean_val_error,fold_1,...,fold_K`; `m` is empty for TL-PCA-D.
    pub fn to_csv(&self) -> String {
        let folds = self.rows.first().map_or(0, |r| r.fold_errors.len());
        let mut out = String::from("alpha,m,mean_val_error");
        for f in 1..=folds {
            out.push_str(&format!(",fold_{f}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},", row.alpha));
            if let Some(m) = row.m {
                out.push_str(&m.to_string());
            }
            out.push(',');
            out.push_str(&fmt_fraction(row.mean_validation_error));
            for e in &row.fold_errors {
                out.push(',');
                out.push_str(&fmt_fraction(*e));
            }
            out.push('\n');
        }
        out
    }
}

/// Fold-local data: centered train block and raw validation block.
struct PreparedFold {
    train: CenteredDataset,
    validation: nalgebra::DMatrix<f64>,
}

fn prepare_folds(target: &DataMatrix, fold_count: usize, seed: u64) -> Result<Vec<PreparedFold>> {
    let split = kfold_split(target.n(), fold_count, seed)?;
    split
        .folds
        .iter()
        .map(|fold| {
            let train = center(&target.select_columns(&fold.train)?);
            let validation = target.select_columns(&fold.validation)?.into_values();
            Ok(PreparedFold { train, validation })
        })
        .collect()
}

fn score(model: &SubspaceModel, validation: &nalgebra::DMatrix<f64>, mean: &DVector<f64>) -> Result<f64> {
    Ok(dataset_error(model, validation, mean)?.normalized_error)
}

#[cfg(feature = "parallel")]
fn map_cells<T, F>(cells: &[(usize, usize)], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    cells.par_iter().map(|&(p, k)| f(p, k)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cells<T, F>(cells: &[(usize, usize)], f: F) -> Result<Vec<T>>
where
    F: Fn(usize, usize) -> Result<T>,
{
    cells.iter().map(|&(p, k)| f(p, k)).collect()
}

fn run_grid<F>(points: &[CvChoice], folds: &[PreparedFold], fit_and_score: F) -> Result<CvTable>
where
    F: Fn(&CvChoice, &PreparedFold) -> Result<f64> + Sync + Send,
{
    let cells: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..folds.len()).map(move |f| (p, f))).collect();
    let errors = map_cells(&cells, |p, f| fit_and_score(&points[p], &folds[f]))?;
    let rows = points
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let fold_errors = errors[p * folds.len()..(p + 1) * folds.len()].to_vec();
            let mean_validation_error = fold_errors.iter().sum::<f64>() / fold_errors.len() as f64;
            CvRow { alpha: point.alpha, m: point.m, mean_validation_error, fold_errors }
        })
        .collect();
    Ok(CvTable::assemble(rows))
}

fn check_shapes(target: &DataMatrix, d: usize, k: usize, grid: &CvGrid) -> Result<()> {
    grid.validate()?;
    if target.d() != d {
        bail!(Dimension, "target has d = {}, source has d = {d}", target.d());
    }
    if k == 0 || k > d {
        bail!(Argument, "k must satisfy 1 <= k <= d = {d}, got {k}");
    }
    if grid.fold_count > target.n() {
        bail!(Argument, "fold count {} exceeds target size {}", grid.fold_count, target.n());
    }
    Ok(())
}

/// Fits TL-PCA-D on one fold's training block.
pub fn fit_fold_d(
    target: &DataMatrix,
    source: &CenteredDataset,
    fold: &Fold,
    k: usize,
    alpha: f64,
    seed: u64,
) -> Result<SubspaceModel> {
    let train = center(&target.select_columns(&fold.train)?);
    tlpca_d_fit(&train, source, &TlpcaDConfig { k, alpha, seed })
}

/// Selects alpha for TL-PCA-D.
pub fn cv_select_d(target: &DataMatrix, source: &DataMatrix, k: usize, grid: &CvGrid) -> Result<CvTable> {
    if grid.m_fractions.is_some() {
        bail!(Argument, "TL-PCA-D takes no m grid");
    }
    check_shapes(target, source.d(), k, grid)?;
    let source = center(source);
    let folds = prepare_folds(target, grid.fold_count, grid.seed)?;
    let points: Vec<CvChoice> = grid.alphas.iter().map(|&alpha| CvChoice { alpha, m: None }).collect();
    run_grid(&points, &folds, |point, fold| {
        let cfg = TlpcaDConfig { k, alpha: point.alpha, seed: grid.seed };
        let model = tlpca_d_fit(&fold.train, &source, &cfg)?;
        score(&model, &fold.validation, &fold.train.mean)
    })
}

/// Jointly selects (alpha, m) for TL-PCA-P.
pub fn cv_select_p(target: &DataMatrix, source_model: &SubspaceModel, k: usize, grid: &CvGrid) -> Result<CvTable> {
    let Some(fractions) = &grid.m_fractions else {
        bail!(Argument, "TL-PCA-P needs an m fraction grid");
    };
    check_shapes(target, source_model.d(), k, grid)?;
    let folds = prepare_folds(target, grid.fold_count, grid.seed)?;
    let ms = m_values(k, fractions, source_model.k());
    let points: Vec<CvChoice> =
        grid.alphas.iter().flat_map(|&alpha| ms.iter().map(move |&m| CvChoice { alpha, m: Some(m) })).collect();
    run_grid(&points, &folds, |point, fold| {
        let cfg = TlpcaPConfig { k, alpha: point.alpha, m: point.m.unwrap_or(1), seed: grid.seed };
        let model = tlpca_p_fit(&fold.train, source_model, &cfg)?;
        score(&model, &fold.validation, &fold.train.mean)
    })
}
