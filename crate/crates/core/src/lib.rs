//! Lasso and logistic-Lasso fitting plus enumeration of performance-equivalent
//! sparse solutions.
//!
//! The pipeline is:
//!
//! 1. [`dataset`]: load a CSV, standardize predictors, build the penalty grid.
//! 2. [`lasso`]: fit a reference solution with maximal support (tuned by
//!    cross-validation or at a fixed penalty).
//! 3. [`spectral`]: thin SVD of the active-set design matrix and the error
//!    bounds that hold on the relaxed polytope.
//! 4. [`polytope`] and [`equivalence`]: build the solution polytopes and
//!    enumerate their vertices, keeping those whose RMSE or deviance stays
//!    within a relative tolerance of the reference.
//! 5. [`categorize`]: per-coefficient feasible ranges by linear programming,
//!    labelling each selected variable indispensable or replaceable.
//! 6. [`report`]: signature heterogeneity statistics.

pub mod categorize;
pub mod cli;
pub mod dataset;
pub mod equivalence;
mod error;
pub mod lasso;
pub(crate) mod linalg;
pub mod polytope;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};

/// Task kind of a dataset, which selects the loss and the performance metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Regression => f.write_str("regression"),
            Task::Classification => f.write_str("classification"),
        }
    }
}
