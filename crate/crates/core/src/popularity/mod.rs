//! Popularity models and estimators.
//!
//! - [`zipf`]: Zipf pmf `P(f) = Ω / f^α` and least-squares fitting of `α`.
//! - [`synth`]: synthetic request traces drawn from a Zipf model.
//! - [`matrix`]: station × content popularity matrices and rating samples.
//! - [`factor`]: collaborative filtering by regularized matrix factorization.

pub mod factor;
pub mod matrix;
pub mod synth;
pub mod zipf;

use thiserror::Error;

pub use factor::{factorize, holdout_rmse, predict, FactorConfig, FactorModel};
pub use matrix::{ground_truth_matrix, sample_ratings, split_ratings, PopularityMatrix, Rating, RatingSample};
pub use synth::{synth_trace, SizeLaw};
pub use zipf::{fit_zipf, zipf_pmf, ZipfModel};

#[derive(Debug, Error)]
pub enum PopularityError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not enough data: {0}")]
    Insufficient(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at epoch {epoch}: {message}")]
    Diverged { epoch: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Catalog(#[from] crate::catalog::CatalogError),
}

pub(crate) type Result<T> = std::result::Result<T, PopularityError>;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
