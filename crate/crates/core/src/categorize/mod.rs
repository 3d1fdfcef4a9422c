//! Per-coefficient feasible ranges over the solution polytopes and the
//! resulting indispensable / replaceable labelling.

mod simplex;

use std::io::Write;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::lasso::LassoSolution;
use crate::polytope::{build_relaxed_polytope, build_strong_polytope, Polytope};
use crate::spectral::{restriction_matrix, SpectralData};
use crate::{Error, Result};

pub use simplex::solve_lp;

/// Slack allowed when testing whether zero lies in a range.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    /// Some equivalent solution sets the coefficient to zero.
    #[serde(rename = "replaceable", alias = "dispensable")]
    Dispensable,
    #[serde(rename = "indispensable")]
    Indispensable,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Category::Dispensable => "replaceable",
            Category::Indispensable => "indispensable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBound {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub category: Category,
}

impl VariableBound {
    fn new(index: usize, lower: f64, upper: f64) -> Self {
        let category = if lower - ZERO_TOL <= 0.0 && 0.0 <= upper + ZERO_TOL {
            Category::Dispensable
        } else {
            Category::Indispensable
        };
        Self {
            index,
            lower,
            upper,
            category,
        }
    }
}

/// Which polytope to optimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Strong,
    /// Relaxed polytope keeping the first `i*` right singular directions.
    Relaxed(usize),
}

/// Range of coordinate `i` over `p`; `index` is what gets reported.
pub fn coef_range(p: &Polytope, i: usize, index: usize) -> Result<VariableBound> {
    if i >= p.dim() {
        return Err(Error::IndexOutOfRange(format!(
            "coordinate {i} of {}",
            p.dim()
        )));
    }
    let mut e = Array1::zeros(p.dim());
    e[i] = 1.0;
    let (_, lower) = solve_lp(&e, p, false)?;
    let (_, upper) = solve_lp(&e, p, true)?;
    Ok(VariableBound::new(index, lower, upper))
}

/// Range of the `i`-th active coefficient over the strong polytope. The
/// returned index is the position `i` within the active set.
pub fn coef_range_strong(
    i: usize,
    x_e: &Array2<f64>,
    beta_e: &Array1<f64>,
    s: &Array1<f64>,
) -> Result<VariableBound> {
    coef_range(&build_strong_polytope(x_e, beta_e, s)?, i, i)
}

/// Range of the `i`-th active coefficient over the relaxed polytope with
/// retained directions `v_star` and box halfwidth `l`.
pub fn coef_range_relaxed(
    i: usize,
    v_star: &Array2<f64>,
    beta_e: &Array1<f64>,
    s: &Array1<f64>,
    l: f64,
) -> Result<VariableBound> {
    coef_range(&build_relaxed_polytope(v_star, beta_e, s, l)?, i, i)
}

/// Polytope in active-set coordinates for `level`, built from the SVD of
/// `X_E`.
pub fn level_polytope(
    reference: &LassoSolution,
    spectral: &SpectralData,
    level: Level,
) -> Result<Polytope> {
    if reference.support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let beta_e = reference.beta_support();
    let s = reference.sign_vector();
    if spectral.ncols() != beta_e.len() {
        return Err(Error::DimensionMismatch(format!(
            "spectral data has {} columns, support has {}",
            spectral.ncols(),
            beta_e.len()
        )));
    }
    match level {
        Level::Strong => {
            let (v, _) = restriction_matrix(spectral, spectral.rank)?;
            let rows = v.t().to_owned();
            let rhs = rows.dot(&beta_e);
            if beta_e.iter().zip(s.iter()).any(|(b, si)| b * si <= 0.0) {
                return Err(Error::InvalidSigns(
                    "reference signs disagree with coefficients".into(),
                ));
            }
            Polytope::new(rows, rhs, s, None)
        }
        Level::Relaxed(i_star) => {
            let (v, _) = restriction_matrix(spectral, i_star)?;
            let l = crate::linalg::norm_inf(beta_e.view());
            build_relaxed_polytope(&v, &beta_e, &s, l)
        }
    }
}

/// One bound per support index, in support order, with `index` set to the
/// predictor index.
pub fn categorize_variables(
    reference: &LassoSolution,
    spectral: &SpectralData,
    level: Level,
) -> Result<Vec<VariableBound>> {
    let p = level_polytope(reference, spectral, level)?;
    reference
        .support
        .iter()
        .enumerate()
        .map(|(k, &j)| coef_range(&p, k, j))
        .collect()
}

/// Writes `index,name,lower,upper,category`; names come from `names` by
/// predictor index, falling back to `x{index}`.
pub fn write_bounds_csv<W: Write>(w: W, bounds: &[VariableBound], names: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
    out.write_record(["index", "name", "lower", "upper", "category"])
        .map_err(io)?;
    for b in bounds {
        let name = names
            .get(b.index)
            .cloned()
            .unwrap_or_else(|| format!("x{}", b.index));
        out.write_record([
            b.index.to_string(),
            name,
            b.lower.to_string(),
            b.upper.to_string(),
            b.category.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
