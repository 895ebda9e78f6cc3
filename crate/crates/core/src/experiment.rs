//! Repeated train/test sweeps over subspace dimension and fitting method.
//!
//! Each repetition draws (or subsamples) a target train set, a source train set
//! and a target test set, then for every `k` fits each method, choosing transfer
//! hyperparameters by cross-validation on the target train set, and records
//! train and test errors.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::cv::{cv_select_d, cv_select_p, CvGrid, DEFAULT_ALPHAS, DEFAULT_FOLDS, DEFAULT_M_FRACTIONS};
use crate::dataset::{center, synth_related_pair, synth_sample, DataMatrix, RelatedPairSpec, SyntheticSpec};
use crate::error::{bail, Result};
use crate::evaluate::dataset_error;
use crate::io::fmt_fraction;
use crate::linalg::{derive_seed, rng_from_seed};
use crate::pca::{pca_fit, SubspaceModel};
use crate::tlpca::{tlpca_d_fit, tlpca_p_fit, TlpcaDConfig, TlpcaPConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pca,
    TlpcaP,
    TlpcaD,
    /// Source PCA scored with the target train mean.
    SourceTargetMean,
    /// Source PCA scored with the source train mean.
    SourceSourceMean,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Pca, Method::TlpcaP, Method::TlpcaD, Method::SourceTargetMean, Method::SourceSourceMean];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::TlpcaP => "tlpca_p",
            Method::TlpcaD => "tlpca_d",
            Method::SourceTargetMean => "pretrained_source_target_mean",
            Method::SourceSourceMean => "pretrained_source_source_mean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| crate::Error::Argument(format!("unknown method {s:?}")))
    }
}

/// Hyperparameter grids used inside each sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSettings {
    pub alphas: Vec<f64>,
    pub m_fractions: Vec<f64>,
    pub fold_count: usize,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self { alphas: DEFAULT_ALPHAS.to_vec(), m_fractions: DEFAULT_M_FRACTIONS.to_vec(), fold_count: DEFAULT_FOLDS }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub cv: CvSettings,
}

/// Where each repetition's data comes from.
#[derive(Debug, Clone)]
pub enum SweepData {
    /// Fresh related pair per repetition, seeded `base_seed + rep`.
    Synthetic { pair: RelatedPairSpec, n_test: usize },
    /// Fixed pools; each repetition subsamples them when sizes are given.
    Provided {
        target_pool: DataMatrix,
        source_pool: DataMatrix,
        test: DataMatrix,
        n_target: Option<usize>,
        n_source: Option<usize>,
    },
}

impl SweepData {
    fn d(&self) -> usize {
        match self {
            SweepData::Synthetic { pair, .. } => pair.d,
            SweepData::Provided { test, .. } => test.d(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub rep: usize,
    pub test_error: f64,
    pub train_error: f64,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub k: usize,
    pub repetitions: usize,
    pub test_mean: f64,
    pub test_std: f64,
    pub train_mean: f64,
    pub train_std: f64,
}

struct Task {
    target: DataMatrix,
    source: DataMatrix,
    test: DMatrix<f64>,
}

fn subsample(pool: &DataMatrix, size: Option<usize>, seed: u64) -> Result<DataMatrix> {
    match size {
        None => Ok(pool.clone()),
        Some(s) if s == 0 || s > pool.n() => bail!(Argument, "cannot draw {s} examples from a pool of {}", pool.n()),
        Some(s) => {
            let mut idx: Vec<usize> = (0..pool.n()).collect();
            idx.shuffle(&mut rng_from_seed(seed));
            idx.truncate(s);
            idx.sort_unstable();
            pool.select_columns(&idx)
        }
    }
}

const STREAM_SUBSAMPLE_TARGET: u64 = 0x51;
const STREAM_SUBSAMPLE_SOURCE: u64 = 0x52;
const STREAM_CELL: u64 = 0x53;

fn build_task(data: &SweepData, rep_seed: u64) -> Result<Task> {
    match data {
        SweepData::Synthetic { pair, n_test } => {
            let generated = synth_related_pair(&RelatedPairSpec { seed: rep_seed, ..*pair })?;
            let test = synth_sample(
                &generated.target_basis,
                &SyntheticSpec {
                    d: pair.d,
                    m: pair.m,
                    noise_sigma: pair.noise_sigma,
                    n: *n_test,
                    seed: derive_seed(rep_seed, crate::dataset::STREAM_TARGET_TEST),
                },
            )?;
            Ok(Task { target: generated.target, source: generated.source, test: test.into_values() })
        }
        SweepData::Provided { target_pool, source_pool, test, n_target, n_source } => {
            if target_pool.d() != test.d() || source_pool.d() != test.d() {
                bail!(Dimension, "target, source and test data must share the ambient dimension");
            }
            Ok(Task {
                target: subsample(target_pool, *n_target, derive_seed(rep_seed, STREAM_SUBSAMPLE_TARGET))?,
                source: subsample(source_pool, *n_source, derive_seed(rep_seed, STREAM_SUBSAMPLE_SOURCE))?,
                test: test.values().clone(),
            })
        }
    }
}

fn run_cell(task: &Task, config: &SweepConfig, k: usize, rep: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let target = center(&task.target);
    let source = center(&task.source);
    let needs_source_model = config
        .methods
        .iter()
        .any(|m| matches!(m, Method::TlpcaP | Method::SourceTargetMean | Method::SourceSourceMean));
    // the pretrained source model has the same dimension as the target fit
    let source_model = if needs_source_model { Some(pca_fit(&source, k, seed)?) } else { None };

    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let (model, eval_mean, alpha, m): (SubspaceModel, _, _, _) = match method {
            Method::Pca => (pca_fit(&target, k, seed)?, target.mean.clone(), None, None),
            Method::TlpcaD => {
                let grid = CvGrid {
                    alphas: config.cv.alphas.clone(),
                    m_fractions: None,
                    fold_count: config.cv.fold_count,
                    seed,
                };
                let alpha = cv_select_d(&task.target, &task.source, k, &grid)?.selected.alpha;
                let model = tlpca_d_fit(&target, &source, &TlpcaDConfig { k, alpha, seed })?;
                (model, target.mean.clone(), Some(alpha), None)
            }
            Method::TlpcaP => {
                let src = source_model.as_ref().expect("source model fitted");
                let grid = CvGrid {
                    alphas: config.cv.alphas.clone(),
                    m_fractions: Some(config.cv.m_fractions.clone()),
                    fold_count: config.cv.fold_count,
                    seed,
                };
                let choice = cv_select_p(&task.target, src, k, &grid)?.selected;
                let m = choice.m.expect("TL-PCA-P selection carries m");
                let model = tlpca_p_fit(&target, src, &TlpcaPConfig { k, alpha: choice.alpha, m, seed })?;
                (model, target.mean.clone(), Some(choice.alpha), Some(m))
            }
            Method::SourceTargetMean => {
                (source_model.clone().expect("source model fitted"), target.mean.clone(), None, None)
            }
            Method::SourceSourceMean => {
                (source_model.clone().expect("source model fitted"), source.mean.clone(), None, None)
            }
        };
        let test_error = dataset_error(&model, &task.test, &eval_mean)?.normalized_error;
        let train_error = dataset_error(&model, task.target.values(), &eval_mean)?.normalized_error;
        rows.push(SweepRow { method, k, rep, test_error, train_error, alpha, m });
    }
    Ok(rows)
}

#[cfg(feature = "parallel")]
fn map_cells<F>(cells: &[(usize, usize)], f: F) -> Result<Vec<Vec<SweepRow>>>
where
    F: Fn(usize, usize) -> Result<Vec<SweepRow>> + Sync + Send,
{
    use rayon::prelude::*;
    cells.par_iter().map(|&(r, k)| f(r, k)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cells<F>(cells: &[(usize, usize)], f: F) -> Result<Vec<Vec<SweepRow>>>
where
    F: Fn(usize, usize) -> Result<Vec<SweepRow>>,
{
    cells.iter().map(|&(r, k)| f(r, k)).collect()
}

/// Runs every (repetition, k, method) cell. Rows come back sorted by
/// method, then k, then repetition.
pub fn run_sweep(config: &SweepConfig, data: &SweepData) -> Result<Vec<SweepRow>> {
    if config.repetitions == 0 {
        bail!(Argument, "at least one repetition is required");
    }
    if config.methods.is_empty() {
        bail!(Argument, "no methods selected");
    }
    let d = data.d();
    if config.k_values.is_empty() || config.k_values.iter().any(|&k| k == 0 || k > d) {
        bail!(Argument, "k values must be non-empty and lie in [1, {d}]");
    }
    let tasks = (0..config.repetitions)
        .map(|rep| build_task(data, config.base_seed.wrapping_add(rep as u64)))
        .collect::<Result<Vec<Task>>>()?;
    let cells: Vec<(usize, usize)> =
        (0..config.repetitions).flat_map(|rep| config.k_values.iter().map(move |&k| (rep, k))).collect();
    let nested = map_cells(&cells, |rep, k| {
        let seed = derive_seed(config.base_seed.wrapping_add(rep as u64), STREAM_CELL ^ ((k as u64) << 8));
        run_cell(&tasks[rep], config, k, rep, seed)
    })?;
    let mut rows: Vec<SweepRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.k.cmp(&b.k)).then(a.rep.cmp(&b.rep)));
    Ok(rows)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation across repetitions per (method, k).
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize)> = rows.iter().map(|r| (r.method, r.k)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(method, k)| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.method == method && r.k == k).collect();
            let test: Vec<f64> = group.iter().map(|r| r.test_error).collect();
            let train: Vec<f64> = group.iter().map(|r| r.train_error).collect();
            let (test_mean, test_std) = mean_std(&test);
            let (train_mean, train_std) = mean_std(&train);
            SummaryRow { method, k, repetitions: group.len(), test_mean, test_std, train_mean, train_std }
        })
        .collect()
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("method,k,rep,test_error,train_error,alpha,m\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.k,
            r.rep,
            fmt_fraction(r.test_error),
            fmt_fraction(r.train_error),
            r.alpha.map(|a| a.to_string()).unwrap_or_default(),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
        ));
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("method,k,reps,test_mean,test_std,train_mean,train_std\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.k,
            r.repetitions,
            fmt_fraction(r.test_mean),
            fmt_fraction(r.test_std),
            fmt_fraction(r.train_mean),
            fmt_fraction(r.train_std),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("tlpca-d".parse::<Method>().unwrap(), Method::TlpcaD);
        assert!("svd".parse::<Method>().is_err());
    }

    #[test]
    fn summary_statistics() {
        let row =
            |rep, e| SweepRow { method: Method::Pca, k: 3, rep, test_error: e, train_error: 0.0, alpha: None, m: None };
        let s = summarize(&[row(0, 0.1), row(1, 0.3)]);
        assert_eq!(s.len(), 1);
        assert!((s[0].test_mean - 0.2).abs() < 1e-15);
        assert!((s[0].test_std - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(summarize(&[row(0, 0.4)])[0].test_std, 0.0);
    }

    #[test]
    fn noiseless_pca_recovers_at_latent_dimension() {
        let pair = RelatedPairSpec { d: 12, m: 3, shared: 3, n_target: 15, n_source: 20, noise_sigma: 0.0, seed: 0 };
        let config = SweepConfig {
            k_values: (1..=12).collect(),
            methods: vec![Method::Pca],
            repetitions: 1,
            base_seed: 4,
            cv: CvSettings::default(),
        };
        let rows = run_sweep(&config, &SweepData::Synthetic { pair, n_test: 50 }).unwrap();
        for r in &rows {
            if r.k >= 3 {
                assert!(r.test_error <= 1e-10, "k = {} error {}", r.k, r.test_error);
            } else {
                assert!(r.test_error > 1e-3);
            }
        }
    }
}
