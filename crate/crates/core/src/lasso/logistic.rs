//! ℓ₁-penalized logistic regression by proximal Newton steps (iteratively
//! reweighted least squares) with coordinate descent on each weighted
//! subproblem and a backtracking line search on the penalized objective.

use ndarray::{Array1, Array2, Axis};

use super::{
    cd, check_dims, elastic_net, kkt_violation, validate_lambda, LassoSolution, SolverOptions,
};
use crate::linalg::{norm1, norm_inf};
use crate::{Error, Result, Task};

const MAX_NEWTON: usize = 1_000;
const MIN_WEIGHT: f64 = 1e-10;
/// Unpenalized fits whose coefficients exceed this are treated as separable.
const SEPARATION_CAP: f64 = 1e3;

/// Numerically stable logistic function.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
pub(crate) fn log1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn smooth_loss(eta: &Array1<f64>, y: &Array1<f64>) -> f64 {
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| log1p_exp(e) - yi * e)
        .sum()
}

/// `Σ[−yᵢηᵢ + log(1 + e^ηᵢ)] + λ‖β‖₁` with `η = b₀ + Xβ`.
pub fn logistic_objective(
    beta: &Array1<f64>,
    intercept: f64,
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
) -> Result<f64> {
    check_dims(x, y, Some(beta))?;
    let eta = x.dot(beta) + intercept;
    Ok(smooth_loss(&eta, y) + lambda * norm1(beta.view()))
}

/// Logistic Lasso with an unpenalized intercept.
pub fn fit_logistic_lasso(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> Result<LassoSolution> {
    fit(x, y, lambda, 0.0)
}

/// Logistic elastic net with a small ridge weight, the classification
/// counterpart of [`super::fit_reference`].
pub fn fit_logistic_reference(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
) -> Result<LassoSolution> {
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge must be > 0, got {ridge}"
        )));
    }
    fit(x, y, lambda, ridge)
}

fn fit(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, ridge: f64) -> Result<LassoSolution> {
    check_dims(x, y, None)?;
    validate_lambda(lambda)?;
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::NonBinaryTarget(0));
    }
    let n = y.len() as f64;
    let ybar = y.sum() / n;
    if ybar == 0.0 || ybar == 1.0 {
        return Err(Error::ConstantTarget);
    }
    let p = x.ncols();
    let mut b0 = (ybar / (1.0 - ybar)).ln();
    let mut beta = Array1::<f64>::zeros(p);

    let penalized = |beta: &Array1<f64>, b0: f64| {
        let eta = x.dot(beta) + b0;
        smooth_loss(&eta, y) + lambda * norm1(beta.view()) + 0.5 * ridge * beta.dot(beta)
    };
    let scale = norm_inf(x.t().dot(&y.mapv(|v| v - ybar)).view()).max(1.0);
    let kkt_target = 1e-9 * scale;
    let inner_opts = SolverOptions {
        tol: 1e-12,
        max_sweeps: 20_000,
    };

    for iter in 1..=MAX_NEWTON {
        let eta = x.dot(&beta) + b0;
        let prob = eta.mapv(sigmoid);
        let resid = y - &prob;
        let grad_corr = x.t().dot(&resid);
        if kkt_violation(&grad_corr, &beta, lambda, ridge).max(resid.sum().abs()) <= kkt_target {
            if lambda == 0.0 && separates(&eta, y) {
                return Err(Error::SeparableData);
            }
            let objective = smooth_loss(&eta, y) + lambda * norm1(beta.view());
            return Ok(LassoSolution::new(
                beta,
                b0,
                lambda,
                objective,
                Task::Classification,
            ));
        }
        if lambda == 0.0 && norm_inf(beta.view()) > SEPARATION_CAP {
            return Err(Error::SeparableData);
        }

        // weighted least-squares subproblem around the current point
        let w = prob.mapv(|pi| (pi * (1.0 - pi)).max(MIN_WEIGHT));
        let z = &eta + &(&resid / &w);
        let sw = w.sum();
        let xbar = x.t().dot(&w) / sw;
        let zbar = w.dot(&z) / sw;
        let sqrt_w = w.mapv(f64::sqrt).insert_axis(Axis(1));
        let xt = (x - &xbar.view().insert_axis(Axis(0))) * &sqrt_w;
        let zt = (&z - zbar) * sqrt_w.column(0);

        let beta_new = if ridge > 0.0 {
            elastic_net(&xt, &zt, lambda, ridge, Some(&beta))?
        } else {
            let mut b = beta.clone();
            cd::elastic_net_cd(&xt, &zt, lambda, 0.0, &mut b, &inner_opts);
            b
        };
        let b0_new = zbar - xbar.dot(&beta_new);
        let d_beta = &beta_new - &beta;
        let d_b0 = b0_new - b0;

        let decrement = -grad_corr.dot(&d_beta) + ridge * beta.dot(&d_beta) - resid.sum() * d_b0
            + lambda * (norm1(beta_new.view()) - norm1(beta.view()));
        let f0 = penalized(&beta, b0);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let trial_beta = &beta + &(&d_beta * t);
            let trial_b0 = b0 + t * d_b0;
            let f = penalized(&trial_beta, trial_b0);
            if f <= f0 + 0.25 * t * decrement.min(0.0) {
                let step = norm_inf((&trial_beta - &beta).view()).max((trial_b0 - b0).abs());
                beta = trial_beta;
                b0 = trial_b0;
                accepted = step > 0.0;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no descent left to find: accept the point if it is stationary to rounding
            let eta = x.dot(&beta) + b0;
            let resid = y - &eta.mapv(sigmoid);
            let viol =
                kkt_violation(&x.t().dot(&resid), &beta, lambda, ridge).max(resid.sum().abs());
            if viol <= 1e-7 * scale {
                if lambda == 0.0 && separates(&eta, y) {
                    return Err(Error::SeparableData);
                }
                let objective = smooth_loss(&eta, y) + lambda * norm1(beta.view());
                return Ok(LassoSolution::new(
                    beta,
                    b0,
                    lambda,
                    objective,
                    Task::Classification,
                ));
            }
            if lambda == 0.0 {
                return Err(Error::SeparableData);
            }
            return Err(Error::NoConvergence { iterations: iter });
        }
    }
    if lambda == 0.0 {
        return Err(Error::SeparableData);
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON,
    })
}

/// True when the linear predictor classifies every sample strictly
/// correctly, in which case the unpenalized likelihood has no maximizer.
fn separates(eta: &Array1<f64>, y: &Array1<f64>) -> bool {
    eta.iter()
        .zip(y.iter())
        .all(|(&e, &yi)| (2.0 * yi - 1.0) * e > 0.0)
}
