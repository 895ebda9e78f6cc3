//! Transfer learning for principal component analysis.
//!
//! A target task with few examples is fit by eigendecomposing its sample
//! covariance augmented with knowledge from a related, data-rich source task:
//!
//! * [`tlpca::tlpca_p_fit`] adds `alpha * U_m U_mᵀ` from a pretrained source
//!   subspace,
//! * [`tlpca::tlpca_d_fit`] adds `alpha * C_source` from the source data itself.
//!
//! Both reduce to a top-k eigenproblem of a PSD matrix `R Rᵀ` that is solved
//! through the small Gram matrix `RᵀR` whenever the factor is thin
//! ([`eigen::top_k_gram`]). The [`evaluate`] module scores fitted subspaces and
//! the [`cv`] module selects hyperparameters by k-fold cross-validation.

pub mod cv;
pub mod dataset;
pub mod eigen;
mod error;
pub mod evaluate;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod pca;
pub mod tlpca;

pub use error::{Error, Result};

pub use dataset::{CenteredDataset, DataMatrix};
pub use eigen::{EigenResult, PsdFactor};
pub use evaluate::{ErrorReport, PrincipalAngles, TrueCovariance};
pub use pca::{FitKind, Hyperparams, SubspaceModel};
