//! Active-set (feature-sign) search for the elastic net.
//!
//! Given a sign pattern on an active set, the minimizer restricted to that
//! pattern solves `(X_AᵀX_A + ridge·I) β_A = X_Aᵀy − λθ_A` exactly. A line
//! search along the segment to that point drops coefficients that cross
//! zero; inactive coordinates whose residual correlation exceeds λ are added
//! one at a time.

use ndarray::{Array1, Array2};

use crate::linalg::{norm1, select_columns};
use crate::spectral::thin_svd;
use crate::{Error, Result};

fn objective(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, ridge: f64, beta: &Array1<f64>) -> f64 {
    let r = y - &x.dot(beta);
    0.5 * r.dot(&r) + lambda * norm1(beta.view()) + 0.5 * ridge * beta.dot(beta)
}

/// Minimizer of the smooth part on the active set with signs fixed.
fn solve_active(
    x: &Array2<f64>,
    xty: &Array1<f64>,
    active: &[usize],
    theta: &[f64],
    lambda: f64,
    ridge: f64,
) -> Result<Array1<f64>> {
    let xa = select_columns(x.view(), active);
    let svd = thin_svd(&xa)?;
    let rhs: Array1<f64> = active.iter().map(|&j| xty[j] - lambda * theta[j]).collect();
    let proj = svd.v.t().dot(&rhs);
    let scaled: Array1<f64> = proj
        .iter()
        .zip(svd.sigma.iter())
        .map(|(&c, &sv)| {
            let d = sv * sv + ridge;
            if ridge == 0.0 && sv <= svd.rank_threshold() {
                0.0
            } else {
                c / d
            }
        })
        .collect();
    Ok(svd.v.dot(&scaled))
}

pub(crate) fn refine(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
    mut beta: Array1<f64>,
) -> Result<Array1<f64>> {
    let p = x.ncols();
    let xty = x.t().dot(y);
    let act_margin = 1e-12 * lambda.max(1.0);
    let mut theta: Vec<f64> = beta
        .iter()
        .map(|&b| if b != 0.0 { b.signum() } else { 0.0 })
        .collect();
    let max_iter = 200 + 50 * p;
    let mut f_before_activation: Option<f64> = None;

    for _ in 0..max_iter {
        let active: Vec<usize> = (0..p).filter(|&j| theta[j] != 0.0).collect();
        if !active.is_empty() {
            let target = solve_active(x, &xty, &active, &theta, lambda, ridge)?;
            let consistent = active
                .iter()
                .zip(target.iter())
                .all(|(&j, &b)| b * theta[j] > 0.0);
            if consistent {
                for (&j, &b) in active.iter().zip(target.iter()) {
                    beta[j] = b;
                }
            } else {
                if !line_search(x, y, lambda, ridge, &mut beta, &active, &target) {
                    return Ok(beta);
                }
                for j in 0..p {
                    theta[j] = if beta[j] != 0.0 {
                        beta[j].signum()
                    } else {
                        0.0
                    };
                }
                continue;
            }
        }

        let f_now = objective(x, y, lambda, ridge, &beta);
        if let Some(f_prev) = f_before_activation {
            // an activation that bought nothing means we are at rounding level
            if f_now >= f_prev - 1e-14 * f_prev.abs() {
                return Ok(beta);
            }
        }
        let g = x.t().dot(&(y - &x.dot(&beta)));
        let candidate = (0..p)
            .filter(|&j| theta[j] == 0.0)
            .map(|j| (j, g[j].abs() - lambda))
            .filter(|&(_, excess)| excess > act_margin)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match candidate {
            Some((j, _)) => {
                theta[j] = g[j].signum();
                f_before_activation = Some(f_now);
            }
            None => return Ok(beta),
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
    })
}

/// Moves from the current active coefficients toward `target`, stopping at
/// the best of the zero crossings and the endpoint. Returns false when no
/// candidate lowers the objective.
fn line_search(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    target: &Array1<f64>,
) -> bool {
    let start: Vec<f64> = active.iter().map(|&j| beta[j]).collect();
    let mut steps = vec![1.0];
    for (k, &b0) in start.iter().enumerate() {
        let b1 = target[k];
        if b0 != 0.0 && b0 * b1 <= 0.0 {
            steps.push(b0 / (b0 - b1));
        }
    }
    let point = |t: f64| {
        let mut trial = beta.clone();
        for (k, &j) in active.iter().enumerate() {
            let b0 = start[k];
            let b1 = target[k];
            // snap coordinates whose crossing is exactly this step
            trial[j] = if b0 != 0.0 && b0 * b1 <= 0.0 && b0 / (b0 - b1) == t {
                0.0
            } else {
                b0 + t * (b1 - b0)
            };
        }
        trial
    };
    let mut best = None;
    let mut best_f = objective(x, y, lambda, ridge, beta);
    for &t in &steps {
        let trial = point(t);
        let f = objective(x, y, lambda, ridge, &trial);
        if f < best_f {
            best_f = f;
            best = Some(trial);
        }
    }
    match best {
        Some(b) => {
            *beta = b;
            true
        }
        None => false,
    }
}
