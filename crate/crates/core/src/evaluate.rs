//! Reconstruction error, principal angles, projection distance and the
//! closed-form expected test error under a known covariance.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{bail, Result};
use crate::linalg::orthonormality_defect;
use crate::pca::SubspaceModel;

/// Orthonormality slack accepted on subspace arguments.
const ORTHONORMAL_TOL: f64 = 1e-6;
/// Singular values above `1 + COSINE_SLACK` indicate broken inputs.
const COSINE_SLACK: f64 = 1e-8;
/// Centering means closer than this (max-abs) count as matched.
const MEAN_MATCH_TOL: f64 = 1e-12;

/// Normalized reconstruction error of a dataset: `Σ‖x − x̂‖² / Σ‖x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub normalized_error: f64,
    pub raw_numerator: f64,
    pub raw_denominator: f64,
    pub n: usize,
    /// Whether the evaluation mean equals the model's fit mean. With a
    /// mismatched mean the error can exceed 1.
    pub mean_matched: bool,
}

impl ErrorReport {
    pub fn percent(&self) -> f64 {
        100.0 * self.normalized_error
    }
}

fn check_model_dims(model: &SubspaceModel, d: usize, centering_mean: &DVector<f64>) -> Result<()> {
    if model.d() != d {
        bail!(Dimension, "model has d = {}, data has d = {d}", model.d());
    }
    if centering_mean.len() != d {
        bail!(Dimension, "centering mean has length {}, expected {d}", centering_mean.len());
    }
    Ok(())
}

/// Scores raw (uncentered) examples: each is shifted by `centering_mean`,
/// projected onto the model basis and shifted back.
pub fn dataset_error(model: &SubspaceModel, data: &DMatrix<f64>, centering_mean: &DVector<f64>) -> Result<ErrorReport> {
    check_model_dims(model, data.nrows(), centering_mean)?;
    let mut shifted = data.clone();
    for mut col in shifted.column_iter_mut() {
        col -= centering_mean;
    }
    let coeffs = model.basis.tr_mul(&shifted);
    let raw_numerator = (shifted - &model.basis * coeffs).norm_squared();
    let raw_denominator = data.norm_squared();
    if raw_denominator == 0.0 {
        bail!(Degenerate, "dataset is identically zero");
    }
    let mean_matched = (centering_mean - &model.mean).amax() <= MEAN_MATCH_TOL;
    Ok(ErrorReport {
        normalized_error: raw_numerator / raw_denominator,
        raw_numerator,
        raw_denominator,
        n: data.ncols(),
        mean_matched,
    })
}

/// `‖x − x̂‖² / ‖x‖²` for a single example.
pub fn example_error(model: &SubspaceModel, x: &DVector<f64>, centering_mean: &DVector<f64>) -> Result<f64> {
    check_model_dims(model, x.len(), centering_mean)?;
    let denom = x.norm_squared();
    if denom == 0.0 {
        bail!(Degenerate, "example is the zero vector");
    }
    let shifted = x - centering_mean;
    let residual = &shifted - &model.basis * model.basis.tr_mul(&shifted);
    Ok(residual.norm_squared() / denom)
}

/// Principal angles between `span(U)` (dimension k) and `span(V)` (k̃ ≥ k).
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngles {
    /// Non-increasing, in `[0, 1]`.
    pub cosines: Vec<f64>,
    /// Non-decreasing, in `[0, π/2]`.
    pub angles_rad: Vec<f64>,
}

impl PrincipalAngles {
    pub fn sum_sin_squared(&self) -> f64 {
        self.cosines.iter().map(|c| 1.0 - c * c).sum()
    }
}

fn check_orthonormal(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let defect = orthonormality_defect(m);
    if defect.is_nan() || defect > ORTHONORMAL_TOL {
        bail!(Argument, "{name} does not have orthonormal columns (‖MᵀM − I‖_F = {defect:e})");
    }
    Ok(())
}

/// Cosines are the singular values of `UᵀV`, clamped to `[0, 1]`.
/// Angles below π/4 are taken from the sines for accuracy.
pub fn principal_angles(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<PrincipalAngles> {
    if u.nrows() != v.nrows() {
        bail!(Dimension, "subspaces live in dimensions {} and {}", u.nrows(), v.nrows());
    }
    if u.ncols() > v.ncols() {
        bail!(Argument, "first subspace must not be larger than the second ({} > {})", u.ncols(), v.ncols());
    }
    check_orthonormal("U", u)?;
    check_orthonormal("V", v)?;
    let k = u.ncols();
    if k == 0 {
        return Ok(PrincipalAngles { cosines: vec![], angles_rad: vec![] });
    }
    let b = u.tr_mul(v);
    let svd = SVD::try_new(b, false, false, f64::EPSILON, 0)
        .ok_or_else(|| crate::Error::Numeric("SVD did not converge".into()))?;
    let mut cosines: Vec<f64> = svd.singular_values.iter().copied().collect();
    if let Some(bad) = cosines.iter().find(|c| !c.is_finite() || **c > 1.0 + COSINE_SLACK || **c < -COSINE_SLACK) {
        bail!(Numeric, "principal cosine {bad} outside [0, 1]");
    }
    cosines.sort_by(|a, b| b.total_cmp(a));
    cosines.truncate(k);
    for c in &mut cosines {
        *c = c.clamp(0.0, 1.0);
    }
    // arccos loses half the digits near 0; small angles come from the sines,
    // the singular values of (I − V Vᵀ) U, which pair with the cosines in reverse
    let residual = u - v * v.tr_mul(u);
    let mut sines: Vec<f64> = SVD::try_new(residual, false, false, f64::EPSILON, 0)
        .ok_or_else(|| crate::Error::Numeric("SVD did not converge".into()))?
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sines.sort_by(|a, b| a.total_cmp(b));
    let angles_rad = cosines.iter().zip(&sines).map(|(c, s)| if c * c > 0.5 { s.asin() } else { c.acos() }).collect();
    Ok(PrincipalAngles { cosines, angles_rad })
}

/// `(1/√2) ‖U Uᵀ − V Vᵀ‖_F`, formed from the explicit projectors.
pub fn projection_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    if u.nrows() != v.nrows() {
        bail!(Dimension, "subspaces live in dimensions {} and {}", u.nrows(), v.nrows());
    }
    let diff = u * u.transpose() - v * v.transpose();
    Ok(diff.norm() * std::f64::consts::FRAC_1_SQRT_2)
}

/// Eigendecomposition `C = Ψ Λ Ψᵀ` of a known (zero-mean) data covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueCovariance {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl TrueCovariance {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let d = eigenvectors.nrows();
        if eigenvectors.ncols() != d || eigenvalues.len() != d {
            bail!(
                Dimension,
                "need d eigenvalues and a d x d eigenvector matrix, got {} and {}x{}",
                eigenvalues.len(),
                d,
                eigenvectors.ncols()
            );
        }
        if eigenvalues.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            bail!(Argument, "eigenvalues must be finite and non-negative");
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            bail!(Argument, "eigenvalues must be non-increasing");
        }
        if orthonormality_defect(&eigenvectors) > 1e-8 {
            bail!(Argument, "eigenvector matrix is not orthogonal");
        }
        Ok(Self { eigenvalues, eigenvectors })
    }

    /// Covariance of `x = U z + ε`: `U Uᵀ + σ² I`.
    ///
    /// `basis` must be orthonormal; the complement is completed with `seed`
    /// (the oracle does not depend on that choice).
    pub fn spiked(basis: &DMatrix<f64>, noise_sigma: f64, seed: u64) -> Result<Self> {
        check_orthonormal("basis", basis)?;
        let d = basis.nrows();
        let m = basis.ncols();
        let psi = crate::eigen::complement_fill(basis, d, seed)?;
        let noise = noise_sigma * noise_sigma;
        let eigenvalues = (0..d).map(|j| if j < m { 1.0 + noise } else { noise }).collect();
        Self::new(eigenvalues, psi)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        scaled * self.eigenvectors.transpose()
    }
}

/// Expected squared residual `E‖(I − U Uᵀ) x‖²` for `x ~ N(0, C)`:
/// `Σ_j λ_j − Σ_{i} Σ_j λ_j ⟨ψ_j, u_i⟩²` over the model's basis columns `u_i`.
pub fn generalization_oracle(model: &SubspaceModel, truth: &TrueCovariance) -> Result<f64> {
    let d = truth.eigenvectors.nrows();
    if model.d() != d {
        bail!(Dimension, "model has d = {}, covariance has d = {d}", model.d());
    }
    if model.mean.amax() > MEAN_MATCH_TOL {
        bail!(Argument, "the oracle assumes zero-mean data and a zero model mean");
    }
    // overlaps[(j, i)] = ⟨ψ_j, u_i⟩
    let overlaps = truth.eigenvectors.tr_mul(&model.basis);
    let total: f64 = truth.eigenvalues.iter().sum();
    let captured: f64 =
        overlaps.column_iter().map(|col| col.iter().zip(&truth.eigenvalues).map(|(o, l)| l * o * o).sum::<f64>()).sum();
    Ok(total - captured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pca::FitKind;
    use nalgebra::{dmatrix, dvector};

    fn model(basis: DMatrix<f64>, mean: DVector<f64>) -> SubspaceModel {
        let k = basis.ncols();
        SubspaceModel { basis, mean, data_rank: k, fit_kind: FitKind::Pca, hyperparams: None, eigenvalues: vec![] }
    }

    #[test]
    fn dataset_error_cases() {
        let m = model(dmatrix![1.0; 0.0], dvector![0.0, 0.0]);
        let r = dataset_error(&m, &dmatrix![3.0; 4.0], &dvector![0.0, 0.0]).unwrap();
        assert!((r.normalized_error - 0.64).abs() < 1e-15);
        assert_eq!((r.raw_numerator, r.raw_denominator, r.n), (16.0, 25.0, 1));
        assert!(r.mean_matched);

        let mean = dvector![2.0, -1.0];
        let at_mean = DMatrix::from_columns(&[mean.clone(), mean.clone()]);
        let r = dataset_error(&model(dmatrix![1.0; 0.0], mean.clone()), &at_mean, &mean).unwrap();
        assert_eq!(r.normalized_error, 0.0);

        let full = model(DMatrix::identity(2, 2), mean.clone());
        let r = dataset_error(&full, &dmatrix![1.0, 5.0; -3.0, 2.0], &mean).unwrap();
        assert!(r.normalized_error <= 1e-12);

        let r = dataset_error(&full, &dmatrix![1.0; 1.0], &dvector![0.0, 0.0]).unwrap();
        assert!(!r.mean_matched);

        assert!(matches!(
            dataset_error(&m, &DMatrix::zeros(2, 3), &dvector![0.0, 0.0]),
            Err(crate::Error::Degenerate(_))
        ));
        assert!(matches!(
            dataset_error(&m, &DMatrix::zeros(3, 3), &dvector![0.0, 0.0]),
            Err(crate::Error::Dimension(_))
        ));
    }

    #[test]
    fn example_error_cases() {
        let m = model(dmatrix![1.0; 0.0], dvector![0.0, 0.0]);
        assert!((example_error(&m, &dvector![3.0, 4.0], &m.mean).unwrap() - 0.64).abs() < 1e-15);
        assert_eq!(example_error(&m, &dvector![-2.0, 0.0], &m.mean).unwrap(), 0.0);
        assert!(matches!(example_error(&m, &dvector![0.0, 0.0], &m.mean), Err(crate::Error::Degenerate(_))));
    }

    #[test]
    fn angle_hand_cases() {
        let e1 = dmatrix![1.0; 0.0; 0.0];
        let e2 = dmatrix![0.0; 1.0; 0.0];
        let same = principal_angles(&e1, &e1).unwrap();
        assert_eq!(same.cosines, vec![1.0]);
        assert_eq!(same.angles_rad, vec![0.0]);
        let orth = principal_angles(&e1, &e2).unwrap();
        assert_eq!(orth.cosines, vec![0.0]);
        assert!((orth.angles_rad[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        let phi = 0.3f64;
        let a = principal_angles(&dmatrix![1.0; 0.0], &dmatrix![phi.cos(); phi.sin()]).unwrap();
        assert!((a.angles_rad[0] - phi).abs() <= 1e-10);
    }

    #[test]
    fn angle_argument_checks() {
        let e1 = dmatrix![1.0; 0.0; 0.0];
        let plane = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        assert!(matches!(principal_angles(&plane, &e1), Err(crate::Error::Argument(_))));
        assert!(matches!(principal_angles(&dmatrix![2.0; 0.0; 0.0], &plane), Err(crate::Error::Argument(_))));
        assert!(matches!(principal_angles(&dmatrix![1.0; 0.0], &plane), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn distance_hand_cases() {
        let e1 = dmatrix![1.0; 0.0; 0.0];
        let e2 = dmatrix![0.0; 1.0; 0.0];
        let plane = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        assert_eq!(projection_distance(&e1, &e1).unwrap(), 0.0);
        assert!((projection_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert!((projection_distance(&e1, &plane).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn oracle_hand_cases() {
        let truth = TrueCovariance::new(vec![4.0, 2.0, 1.0], DMatrix::identity(3, 3)).unwrap();
        let top2 = model(DMatrix::identity(3, 3).columns(0, 2).into_owned(), DVector::zeros(3));
        assert!((generalization_oracle(&top2, &truth).unwrap() - 1.0).abs() < 1e-15);
        let full = model(DMatrix::identity(3, 3), DVector::zeros(3));
        assert!(generalization_oracle(&full, &truth).unwrap().abs() < 1e-15);
        let shifted = model(DMatrix::identity(3, 3), dvector![1.0, 0.0, 0.0]);
        assert!(matches!(generalization_oracle(&shifted, &truth), Err(crate::Error::Argument(_))));
        assert!(TrueCovariance::new(vec![1.0, 2.0], DMatrix::identity(2, 2)).is_err());
    }
}
