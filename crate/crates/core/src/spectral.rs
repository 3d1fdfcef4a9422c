//! Thin SVD of the active-set design matrix and the error bounds that hold
//! on the relaxed solution polytope.

use ndarray::{s, Array1, Array2};

use crate::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `X = U·diag(σ)·Vᵀ` with `σ` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// n×m, orthonormal columns (where n ≥ m or for the nonzero part).
    pub u: Array2<f64>,
    pub sigma: Array1<f64>,
    /// m×m orthogonal; column j is the right singular vector of `sigma[j]`.
    pub v: Array2<f64>,
    /// Number of singular values above [`SpectralData::rank_threshold`].
    pub rank: usize,
    rank_threshold: f64,
}

impl SpectralData {
    /// `σ₁·max(n, m)·ε_machine`.
    pub fn rank_threshold(&self) -> f64 {
        self.rank_threshold
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of a working copy of `x` are rotated pairwise until mutually
/// orthogonal; the accumulated rotations form `V` and the final column
/// norms are the singular values. Works for any shape; `V` is always the
/// full m×m orthogonal factor, which the null-space computations rely on.
pub fn thin_svd(x: &Array2<f64>) -> Result<SpectralData> {
    let (n, m) = x.dim();
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch(format!("empty {n}x{m} matrix")));
    }
    let mut a = x.clone();
    let mut v = Array2::<f64>::eye(m);
    // columns whose squared norm is below this are rounding residue
    let negligible = {
        let fro2: f64 = x.iter().map(|e| e * e).sum();
        fro2 * (f64::EPSILON * f64::EPSILON)
    };
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..m.saturating_sub(1) {
            for k in (j + 1)..m {
                let (alpha, beta, gamma) = {
                    let cj = a.column(j);
                    let ck = a.column(k);
                    (cj.dot(&cj), ck.dot(&ck), cj.dot(&ck))
                };
                if gamma == 0.0
                    || alpha.min(beta) <= negligible
                    || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                rotate_columns(&mut a, j, k, c, sn);
                rotate_columns(&mut v, j, k, c, sn);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = (0..m)
        .map(|j| a.column(j).dot(&a.column(j)).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma: Array1<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut v_sorted = Array2::zeros((m, m));
    for (k, &j) in order.iter().enumerate() {
        v_sorted.column_mut(k).assign(&v.column(j));
    }
    let threshold = sigma[0] * n.max(m) as f64 * f64::EPSILON;
    let rank = sigma.iter().filter(|&&sv| sv > threshold).count();

    let mut u = Array2::zeros((n, m));
    for (k, &j) in order.iter().enumerate() {
        if sigma[k] > threshold {
            u.column_mut(k).assign(&a.column(j).mapv(|e| e / sigma[k]));
        }
    }
    complete_orthonormal(&mut u, rank);

    Ok(SpectralData {
        u,
        sigma,
        v: v_sorted,
        rank,
        rank_threshold: threshold,
    })
}

fn rotate_columns(a: &mut Array2<f64>, j: usize, k: usize, c: f64, s: f64) {
    for i in 0..a.nrows() {
        let aj = a[[i, j]];
        let ak = a[[i, k]];
        a[[i, j]] = c * aj - s * ak;
        a[[i, k]] = s * aj + c * ak;
    }
}

/// Fills columns `from..` of `u` with unit vectors orthogonal to all
/// previous columns, as long as the row dimension leaves room.
fn complete_orthonormal(u: &mut Array2<f64>, from: usize) {
    let (n, m) = u.dim();
    let mut filled = from;
    let mut candidate = 0;
    while filled < m.min(n) && candidate < n {
        let mut w = Array1::<f64>::zeros(n);
        w[candidate] = 1.0;
        candidate += 1;
        for _ in 0..2 {
            for k in 0..filled {
                let proj = u.column(k).dot(&w);
                w.scaled_add(-proj, &u.column(k));
            }
        }
        let norm = w.dot(&w).sqrt();
        if norm > 0.5 {
            u.column_mut(filled).assign(&(w / norm));
            filled += 1;
        }
    }
}

/// First `i_star` right singular vectors and the discarded singular values
/// `σ̄* = (σ_{i*+1}, …, σ_m)`.
pub fn restriction_matrix(s: &SpectralData, i_star: usize) -> Result<(Array2<f64>, Array1<f64>)> {
    let m = s.ncols();
    if i_star > m {
        return Err(Error::IndexOutOfRange(format!(
            "i* = {i_star} exceeds {m} columns"
        )));
    }
    Ok((
        s.v.slice(s![.., ..i_star]).to_owned(),
        s.sigma.slice(s![i_star..]).to_owned(),
    ))
}

fn slack(l: f64, norm: f64, e_size: usize, n: usize) -> f64 {
    2.0 * l * norm * (e_size as f64 / n as f64).sqrt()
}

/// Worst-case RMSE of any point of the relaxed polytope:
/// `rmse_ref + 2·l·‖σ̄*‖∞·√(|E|/n)`.
pub fn rmse_bound(l: f64, sigma_bar: &[f64], e_size: usize, n: usize, rmse_ref: f64) -> f64 {
    let norm = sigma_bar.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    rmse_ref + slack(l, norm, e_size, n)
}

/// Worst-case mean deviance of any point of the relaxed polytope:
/// `dev_ref + 2·l·‖σ̄*‖₂·√(|E|/n)`.
pub fn dev_bound(l: f64, sigma_bar: &[f64], e_size: usize, n: usize, dev_ref: f64) -> f64 {
    let norm = sigma_bar.iter().map(|v| v * v).sum::<f64>().sqrt();
    dev_ref + slack(l, norm, e_size, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_factorization(x: &Array2<f64>, s: &SpectralData) {
        let recon = s.u.dot(&Array2::from_diag(&s.sigma)).dot(&s.v.t());
        assert!(max_abs(&(&recon - x)) <= 1e-10 * s.sigma[0].max(1e-300));
        let m = s.ncols();
        assert!(max_abs(&(s.v.t().dot(&s.v) - Array2::<f64>::eye(m))) < 1e-10);
        assert!(s.sigma.windows(2).into_iter().all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity() {
        let x = Array2::<f64>::eye(3);
        let s = thin_svd(&x).unwrap();
        assert_eq!(s.sigma, array![1.0, 1.0, 1.0]);
        assert_eq!(s.rank, 3);
        check_factorization(&x, &s);
    }

    #[test]
    fn duplicated_column_has_rank_one() {
        let x = array![[1.0, 1.0], [2.0, 2.0], [-0.5, -0.5]];
        let s = thin_svd(&x).unwrap();
        assert_eq!(s.rank, 1);
        assert!(s.sigma[1] <= s.rank_threshold());
        check_factorization(&x, &s);
    }

    #[test]
    fn random_matrices_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n, m) in &[(5, 3), (3, 5), (8, 8), (1, 4), (6, 1)] {
            let x = Array2::from_shape_fn((n, m), |_| rng.gen_range(-1.0..1.0));
            let s = thin_svd(&x).unwrap();
            check_factorization(&x, &s);
            if n >= m {
                assert!(max_abs(&(s.u.t().dot(&s.u) - Array2::<f64>::eye(m))) < 1e-10);
            }
        }
    }

    #[test]
    fn restriction_extremes() {
        let x = array![[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
        let s = thin_svd(&x).unwrap();
        let (v, rest) = restriction_matrix(&s, 2).unwrap();
        assert_eq!(v, s.v);
        assert!(rest.is_empty());
        let (v, rest) = restriction_matrix(&s, 0).unwrap();
        assert_eq!(v.dim(), (2, 0));
        assert_eq!(rest, s.sigma);
        assert!(matches!(
            restriction_matrix(&s, 3),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn restriction_at_rank_spans_row_space() {
        let x = array![
            [1.0, 1.0, 0.0],
            [2.0, 2.0, 1.0],
            [0.0, 0.0, 3.0],
            [1.0, 1.0, 1.0]
        ];
        let s = thin_svd(&x).unwrap();
        assert_eq!(s.rank, 2);
        let (v, _) = restriction_matrix(&s, s.rank).unwrap();
        // a null-space direction of X is orthogonal to the kept directions
        let null = array![1.0, -1.0, 0.0];
        assert!(max_abs(&v.t().dot(&null).insert_axis(ndarray::Axis(1))) < 1e-12);
        // and any vector orthogonal to them is annihilated by X
        let tail = s.v.column(2).to_owned();
        assert!(x.dot(&tail).iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn bounds_arithmetic() {
        assert_eq!(rmse_bound(1.0, &[], 4, 100, 1.0), 1.0);
        assert!((rmse_bound(1.0, &[0.5, 0.2], 4, 100, 1.0) - 1.2).abs() < 1e-15);
        let base = rmse_bound(1.0, &[0.5, 0.2], 4, 100, 0.0);
        assert!((rmse_bound(2.0, &[0.5, 0.2], 4, 100, 0.0) - 2.0 * base).abs() < 1e-15);
        assert!((dev_bound(2.0, &[0.3, 0.4], 1, 4, 0.7) - 1.7).abs() < 1e-15);
        assert_eq!(dev_bound(2.0, &[], 1, 4, 0.7), 0.7);
        let sb = [0.3, 0.4, 0.1];
        assert!(dev_bound(1.0, &sb, 3, 9, 0.0) >= rmse_bound(1.0, &sb, 3, 9, 0.0));
    }
}
