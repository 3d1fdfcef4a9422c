use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{fit_lasso_with, fit_logistic_lasso, SolverOptions};
use crate::dataset::{fold_assignments, Dataset};
use crate::{Error, Result, Task};

/// Outcome of penalty tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda_star: f64,
    /// Mean fold score per grid value, in grid order: AUC for
    /// classification (higher is better), MAE for regression (lower is better).
    pub cv_scores: Vec<f64>,
}

/// Mean absolute error.
pub fn mean_absolute_error(y: &Array1<f64>, pred: &Array1<f64>) -> f64 {
    (y - pred).mapv(f64::abs).mean().unwrap_or(0.0)
}

/// Area under the ROC curve via the rank-sum statistic; tied scores get
/// midranks. Returns 0.5 when either class is absent.
pub fn roc_auc(y: &Array1<f64>, score: &Array1<f64>) -> f64 {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && score[order[j + 1]] == score[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    let n_pos = y.iter().filter(|&&v| v == 1.0).count() as f64;
    let n_neg = n as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return 0.5;
    }
    let rank_sum: f64 = (0..n).filter(|&k| y[k] == 1.0).map(|k| ranks[k]).sum();
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

/// K-fold cross-validated choice of λ over `grid` (stratified folds for
/// classification). Ties go to the smaller λ.
pub fn tune_lambda_cv(d: &Dataset, grid: &[f64], folds: usize, seed: u64) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid("no lambda values".into()));
    }
    let assignment = fold_assignments(d, folds, seed)?;
    let mut totals = vec![0.0; grid.len()];
    // fit from the largest penalty down so warm starts stay close
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));

    for fold in 0..folds {
        let train: Vec<usize> = (0..d.n_samples())
            .filter(|&i| assignment[i] != fold)
            .collect();
        let test: Vec<usize> = (0..d.n_samples())
            .filter(|&i| assignment[i] == fold)
            .collect();
        if train.len() < 2 || test.is_empty() {
            return Err(Error::FoldTooSmall(format!(
                "fold {fold} has {} training and {} test rows",
                train.len(),
                test.len()
            )));
        }
        let xtr = d.x().select(Axis(0), &train);
        let ytr = d.y().select(Axis(0), &train);
        let xte = d.x().select(Axis(0), &test);
        let yte = d.y().select(Axis(0), &test);
        match d.task() {
            Task::Regression => {
                let xmean = xtr.mean_axis(Axis(0)).expect("nonempty");
                let ymean = ytr.mean().expect("nonempty");
                let xc: Array2<f64> = &xtr - &xmean.view().insert_axis(Axis(0));
                let yc = ytr.mapv(|v| v - ymean);
                let mut warm: Option<Array1<f64>> = None;
                for &g in &order {
                    let sol = fit_lasso_with(
                        &xc,
                        &yc,
                        grid[g],
                        &SolverOptions::default(),
                        warm.as_ref(),
                    )?;
                    let b0 = ymean - xmean.dot(&sol.beta);
                    let pred = xte.dot(&sol.beta) + b0;
                    totals[g] += mean_absolute_error(&yte, &pred);
                    warm = Some(sol.beta);
                }
            }
            Task::Classification => {
                for &g in &order {
                    let sol = fit_logistic_lasso(&xtr, &ytr, grid[g])?;
                    let score = xte.dot(&sol.beta) + sol.intercept;
                    totals[g] += roc_auc(&yte, &score);
                }
            }
        }
    }
    let cv_scores: Vec<f64> = totals.iter().map(|t| t / folds as f64).collect();
    let better = |a: f64, b: f64| match d.task() {
        Task::Regression => a < b,
        Task::Classification => a > b,
    };
    let mut ascending: Vec<usize> = (0..grid.len()).collect();
    ascending.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut best = ascending[0];
    for &g in &ascending[1..] {
        if better(cv_scores[g], cv_scores[best]) {
            best = g;
        }
    }
    Ok(CvResult {
        lambda_star: grid[best],
        cv_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn auc_perfect_and_inverted() {
        let y = array![0.0, 0.0, 1.0, 1.0];
        assert_eq!(roc_auc(&y, &array![0.1, 0.2, 0.8, 0.9]), 1.0);
        assert_eq!(roc_auc(&y, &array![0.9, 0.8, 0.2, 0.1]), 0.0);
        assert_eq!(roc_auc(&y, &array![0.5, 0.5, 0.5, 0.5]), 0.5);
    }

    #[test]
    fn auc_matches_pair_count() {
        let y = array![1.0, 0.0, 1.0, 0.0, 1.0];
        let s = array![0.3, 0.2, 0.2, 0.9, 0.7];
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                if y[i] == 1.0 && y[j] == 0.0 {
                    pairs += 1.0;
                    if s[i] > s[j] {
                        wins += 1.0;
                    } else if s[i] == s[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        assert!((roc_auc(&y, &s) - wins / pairs).abs() < 1e-15);
    }

    #[test]
    fn mae() {
        assert_eq!(
            mean_absolute_error(&array![1.0, 2.0], &array![2.0, 0.0]),
            1.5
        );
    }
}
