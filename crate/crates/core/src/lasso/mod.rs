//! Lasso and logistic-Lasso fitting.
//!
//! Regression minimizes `½‖y − Xβ‖² + λ‖β‖₁` on a centered target (the
//! intercept is implicit). Classification minimizes
//! `Σ[−yᵢηᵢ + log(1 + e^ηᵢ)] + λ‖β‖₁` with `η = b₀ + Xβ` and an unpenalized
//! intercept `b₀`, i.e. `n·DEV + λ‖β‖₁`.

mod cd;
mod cv;
mod feature_sign;
mod logistic;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::linalg::norm1;
use crate::{Error, Result, Task};

pub use cv::{mean_absolute_error, roc_auc, tune_lambda_cv, CvResult};
pub(crate) use logistic::log1p_exp;
pub use logistic::{fit_logistic_lasso, fit_logistic_reference, logistic_objective, sigmoid};

/// Coefficients with magnitude at or below this are outside the support.
pub const SUPPORT_EPS: f64 = 1e-10;

/// Stationarity tolerance every fit must meet.
pub const KKT_EPS: f64 = 1e-6;

/// Sweep limits for the coordinate-descent solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the largest coordinate change of a sweep drops below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

/// A fitted coefficient vector together with its support and sign pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoSolution {
    pub lambda: f64,
    pub intercept: f64,
    #[serde(with = "array1_serde")]
    pub beta: Array1<f64>,
    /// Strictly increasing indices with `|βᵢ| > SUPPORT_EPS`.
    pub support: Vec<usize>,
    /// `sign(β)` over the support, each `-1` or `+1`.
    pub signs: Vec<i8>,
    pub task: Task,
    pub objective: f64,
    #[serde(default)]
    pub column_names: Vec<String>,
}

impl LassoSolution {
    pub fn new(beta: Array1<f64>, intercept: f64, lambda: f64, objective: f64, task: Task) -> Self {
        let support = support_of(&beta);
        let signs = support
            .iter()
            .map(|&j| if beta[j] > 0.0 { 1 } else { -1 })
            .collect();
        Self {
            lambda,
            intercept,
            beta,
            support,
            signs,
            task,
            objective,
            column_names: Vec::new(),
        }
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Self {
        self.column_names = names;
        self
    }

    /// Coefficients restricted to the support.
    pub fn beta_support(&self) -> Array1<f64> {
        self.support.iter().map(|&j| self.beta[j]).collect()
    }

    /// Signs over the support as floats.
    pub fn sign_vector(&self) -> Array1<f64> {
        self.signs.iter().map(|&s| f64::from(s)).collect()
    }
}

/// Indices of coefficients with `|βᵢ| > SUPPORT_EPS`.
pub fn support_of(beta: &Array1<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > SUPPORT_EPS)
        .map(|(j, _)| j)
        .collect()
}

fn check_dims(x: &Array2<f64>, y: &Array1<f64>, beta: Option<&Array1<f64>>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows, y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(b) = beta {
        if b.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns, beta has {} entries",
                x.ncols(),
                b.len()
            )));
        }
    }
    Ok(())
}

/// `½‖y − Xβ‖² + λ‖β‖₁`.
pub fn lasso_objective(
    beta: &Array1<f64>,
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
) -> Result<f64> {
    check_dims(x, y, Some(beta))?;
    let r = y - &x.dot(beta);
    Ok(0.5 * r.dot(&r) + lambda * norm1(beta.view()))
}

/// Smallest penalty at which the all-zero coefficient vector is optimal.
pub fn lambda_max(x: &Array2<f64>, y: &Array1<f64>, task: Task) -> f64 {
    let centered = match task {
        Task::Regression => y.clone(),
        Task::Classification => {
            let m = y.mean().unwrap_or(0.0);
            y.mapv(|v| v - m)
        }
    };
    x.t().dot(&centered).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest violation of the Lasso stationarity conditions.
///
/// On the support: `|gⱼ − λ·sign(βⱼ)|`; off it: `max(|gⱼ| − λ, 0)`, where
/// `g = Xᵀ(y − Xβ)` for regression and `g = Xᵀ(y − p)` for classification.
/// Classification additionally includes the intercept condition `|Σ(y − p)|`.
///
/// Panics if the dimensions of `x`, `y` and the solution disagree.
pub fn kkt_check(sol: &LassoSolution, x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> f64 {
    let (grad, extra) = match sol.task {
        Task::Regression => (x.t().dot(&(y - &x.dot(&sol.beta))), 0.0),
        Task::Classification => {
            let eta = x.dot(&sol.beta) + sol.intercept;
            let resid = y - &eta.mapv(sigmoid);
            (x.t().dot(&resid), resid.sum().abs())
        }
    };
    kkt_violation(&grad, &sol.beta, lambda, 0.0).max(extra)
}

/// Stationarity violation given the negative smooth gradient `g` (residual
/// correlation). `ridge` adds the `½·ridge·‖β‖²` term.
pub(crate) fn kkt_violation(g: &Array1<f64>, beta: &Array1<f64>, lambda: f64, ridge: f64) -> f64 {
    g.iter()
        .zip(beta.iter())
        .map(|(&gj, &bj)| {
            if bj.abs() > SUPPORT_EPS {
                (gj - ridge * bj - lambda * bj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Ridge weight used for the reference fit when none is given.
pub fn default_ridge(lambda: f64) -> f64 {
    1e-6 * lambda
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Lasso fit by cyclic coordinate descent.
pub fn fit_lasso(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> Result<LassoSolution> {
    fit_lasso_with(x, y, lambda, &SolverOptions::default(), None)
}

/// [`fit_lasso`] with explicit limits and an optional warm start.
pub fn fit_lasso_with(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    opts: &SolverOptions,
    warm: Option<&Array1<f64>>,
) -> Result<LassoSolution> {
    check_dims(x, y, warm)?;
    validate_lambda(lambda)?;
    let mut beta = warm.cloned().unwrap_or_else(|| Array1::zeros(x.ncols()));
    let out = cd::elastic_net_cd(x, y, lambda, 0.0, &mut beta, opts);
    if !out.converged {
        return Err(Error::NoConvergence {
            iterations: out.sweeps,
        });
    }
    let objective = lasso_objective(&beta, x, y, lambda)?;
    Ok(LassoSolution::new(
        beta,
        0.0,
        lambda,
        objective,
        Task::Regression,
    ))
}

/// Elastic-net fit with a small ridge term whose support serves as the
/// equicorrelation set.
///
/// The ridge term makes the minimizer unique and spreads mass evenly over
/// collinear predictors, so every member of a collinear group enters the
/// support. Coordinate descent provides a warm start and an active-set
/// (feature-sign) search finishes the solve exactly, since coordinate
/// descent alone crawls along directions that only the ridge term pins down.
/// The reported objective is the Lasso objective (without the ridge term).
pub fn fit_reference(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
) -> Result<LassoSolution> {
    check_dims(x, y, None)?;
    validate_lambda(lambda)?;
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge must be > 0, got {ridge}"
        )));
    }
    let beta = elastic_net(x, y, lambda, ridge, None)?;
    let objective = lasso_objective(&beta, x, y, lambda)?;
    Ok(LassoSolution::new(
        beta,
        0.0,
        lambda,
        objective,
        Task::Regression,
    ))
}

/// Exact elastic-net minimizer of `½‖y − Xβ‖² + λ‖β‖₁ + ½·ridge·‖β‖²`.
pub(crate) fn elastic_net(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
    warm: Option<&Array1<f64>>,
) -> Result<Array1<f64>> {
    let mut beta = warm.cloned().unwrap_or_else(|| Array1::zeros(x.ncols()));
    let warmup = SolverOptions {
        tol: 1e-10,
        max_sweeps: 2_000,
    };
    cd::elastic_net_cd(x, y, lambda, ridge, &mut beta, &warmup);
    feature_sign::refine(x, y, lambda, ridge, beta)
}

/// Serde adapter storing an `Array1<f64>` as a plain JSON list.
pub(crate) mod array1_serde {
    use ndarray::Array1;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &Array1<f64>, s: S) -> Result<S::Ok, S::Error> {
        match a.as_slice() {
            Some(sl) => sl.serialize(s),
            None => a.to_vec().serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array1<f64>, D::Error> {
        Vec::<f64>::deserialize(d).map(Array1::from)
    }
}
