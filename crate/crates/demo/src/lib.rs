//! Browser bindings for the interactive demo in `www/`.
//!
//! A [`Scenario`] holds one synthetic target/source pair plus a held-out
//! target test set; its methods return flat `Float64Array`s that the page
//! plots directly. The plain-Rust `*_rows` methods carry the logic so they
//! can be tested off the browser.

use nalgebra::DMatrix;
use tlpca::cv::{cv_select_d, CvGrid, DEFAULT_ALPHAS};
use tlpca::dataset::{
    center, synth_related_pair, synth_sample, CenteredDataset, DataMatrix, RelatedPairSpec, SyntheticSpec,
    STREAM_TARGET_TEST,
};
use tlpca::evaluate::{dataset_error, projection_distance};
use tlpca::linalg::derive_seed;
use tlpca::pca::{pca_fit, SubspaceModel};
use tlpca::tlpca::{tlpca_d_fit, tlpca_p_fit, TlpcaDConfig, TlpcaPConfig};
use wasm_bindgen::prelude::*;

const TEST_EXAMPLES: usize = 500;

#[wasm_bindgen]
pub struct Scenario {
    target_raw: DataMatrix,
    target: CenteredDataset,
    source: CenteredDataset,
    target_basis: DMatrix<f64>,
    test: DataMatrix,
    seed: u64,
}

impl Scenario {
    pub fn try_new(spec: &RelatedPairSpec) -> tlpca::Result<Self> {
        let pair = synth_related_pair(spec)?;
        let test = synth_sample(
            &pair.target_basis,
            &SyntheticSpec {
                d: spec.d,
                m: spec.m,
                noise_sigma: spec.noise_sigma,
                n: TEST_EXAMPLES,
                seed: derive_seed(spec.seed, STREAM_TARGET_TEST),
            },
        )?;
        Ok(Self {
            target: center(&pair.target),
            source: center(&pair.source),
            target_raw: pair.target,
            target_basis: pair.target_basis,
            test,
            seed: spec.seed,
        })
    }

    fn test_error(&self, model: &SubspaceModel) -> tlpca::Result<f64> {
        Ok(dataset_error(model, self.test.values(), &model.mean)?.normalized_error)
    }

    /// Rows of `[k, pca, tlpca_p, tlpca_d]` test errors for `k = 1..=k_max`.
    /// TL-PCA-P transfers the leading `min(k, m_transfer)` source directions.
    pub fn error_rows(&self, alpha: f64, k_max: usize, m_transfer: usize) -> tlpca::Result<Vec<[f64; 4]>> {
        let k_max = k_max.min(self.target.d());
        // every fit below is a prefix of this one, so fit the source once
        let source_full = pca_fit(&self.source, k_max, self.seed)?;
        (1..=k_max)
            .map(|k| {
                let source_model = source_full.truncated(k)?;
                let pca = pca_fit(&self.target, k, self.seed)?;
                let p = tlpca_p_fit(
                    &self.target,
                    &source_model,
                    &TlpcaPConfig { k, alpha, m: k.min(m_transfer.max(1)), seed: self.seed },
                )?;
                let d = tlpca_d_fit(&self.target, &self.source, &TlpcaDConfig { k, alpha, seed: self.seed })?;
                Ok([k as f64, self.test_error(&pca)?, self.test_error(&p)?, self.test_error(&d)?])
            })
            .collect()
    }

    /// Rows of `[alpha, distance to source subspace, distance to true target
    /// subspace, test error]` for TL-PCA-P with `m = k`.
    pub fn alignment_rows(&self, k: usize, alphas: &[f64]) -> tlpca::Result<Vec<[f64; 4]>> {
        let source_model = pca_fit(&self.source, k, self.seed)?;
        alphas
            .iter()
            .map(|&alpha| {
                let fit = tlpca_p_fit(&self.target, &source_model, &TlpcaPConfig { k, alpha, m: k, seed: self.seed })?;
                Ok([
                    alpha,
                    projection_distance(&fit.basis, &source_model.basis)?,
                    projection_distance(&fit.basis, &self.target_basis)?,
                    self.test_error(&fit)?,
                ])
            })
            .collect()
    }

    /// Cross-validated TL-PCA-D: rows of `[alpha, mean validation error]` over
    /// the default grid, plus the selected alpha and its test error.
    pub fn cv_rows(&self, k: usize, folds: usize) -> tlpca::Result<(Vec<[f64; 2]>, f64, f64)> {
        let grid = CvGrid { alphas: DEFAULT_ALPHAS.to_vec(), m_fractions: None, fold_count: folds, seed: self.seed };
        let table = cv_select_d(&self.target_raw, &self.source.centered, k, &grid)?;
        let alpha = table.selected.alpha;
        let fit = tlpca_d_fit(&self.target, &self.source, &TlpcaDConfig { k, alpha, seed: self.seed })?;
        let rows = table.rows.iter().map(|r| [r.alpha, r.mean_validation_error]).collect();
        Ok((rows, alpha, self.test_error(&fit)?))
    }
}

fn js_err(e: tlpca::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn flatten<const N: usize>(rows: Vec<[f64; N]>) -> Vec<f64> {
    rows.into_iter().flatten().collect()
}

#[wasm_bindgen]
impl Scenario {
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        m: usize,
        shared: usize,
        n_target: usize,
        n_source: usize,
        sigma: f64,
        seed: u32,
    ) -> Result<Scenario, JsError> {
        let spec = RelatedPairSpec { d, m, shared, n_target, n_source, noise_sigma: sigma, seed: u64::from(seed) };
        Scenario::try_new(&spec).map_err(js_err)
    }

    #[wasm_bindgen(js_name = errorCurve)]
    pub fn error_curve(&self, alpha: f64, k_max: usize, m_transfer: usize) -> Result<Vec<f64>, JsError> {
        self.error_rows(alpha, k_max, m_transfer).map(flatten).map_err(js_err)
    }

    #[wasm_bindgen(js_name = alignmentCurve)]
    pub fn alignment_curve(&self, k: usize, alphas: Vec<f64>) -> Result<Vec<f64>, JsError> {
        self.alignment_rows(k, &alphas).map(flatten).map_err(js_err)
    }

    /// `[selected alpha, its test error, alpha_1, err_1, alpha_2, err_2, ...]`.
    #[wasm_bindgen(js_name = crossValidate)]
    pub fn cross_validate(&self, k: usize, folds: usize) -> Result<Vec<f64>, JsError> {
        let (rows, alpha, test) = self.cv_rows(k, folds).map_err(js_err)?;
        Ok([alpha, test].into_iter().chain(flatten(rows)).collect())
    }
}
