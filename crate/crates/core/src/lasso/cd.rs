use ndarray::{Array1, Array2};

use super::{kkt_violation, SolverOptions};
use crate::linalg::soft_threshold;

pub(crate) struct CdOutcome {
    pub converged: bool,
    pub sweeps: usize,
}

/// Cyclic coordinate descent for `½‖y − Xβ‖² + λ‖β‖₁ + ½·ridge·‖β‖²`,
/// updating `beta` in place.
///
/// A sweep counts as converged when the largest coordinate change is below
/// `opts.tol` and the stationarity violation is below `1e-12·max(1, ‖Xᵀy‖∞)`.
pub(crate) fn elastic_net_cd(
    x: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    ridge: f64,
    beta: &mut Array1<f64>,
    opts: &SolverOptions,
) -> CdOutcome {
    let p = x.ncols();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    let kkt_target = 1e-12 * x.t().dot(y).iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut resid = y - &x.dot(beta);

    for sweep in 1..=opts.max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let denom = col_sq[j] + ridge;
            if denom == 0.0 {
                beta[j] = 0.0;
                continue;
            }
            let col = x.column(j);
            let old = beta[j];
            let rho = col.dot(&resid) + col_sq[j] * old;
            let new = soft_threshold(rho, lambda) / denom;
            let delta = new - old;
            if delta != 0.0 {
                resid.scaled_add(-delta, &col);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < opts.tol {
            // refresh the residual to shed accumulated rounding before judging
            resid = y - &x.dot(beta);
            let g = x.t().dot(&resid);
            if kkt_violation(&g, beta, lambda, ridge) <= kkt_target {
                return CdOutcome {
                    converged: true,
                    sweeps: sweep,
                };
            }
        }
    }
    CdOutcome {
        converged: false,
        sweeps: opts.max_sweeps,
    }
}
