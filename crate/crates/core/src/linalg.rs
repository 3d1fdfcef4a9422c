//! Small dense helpers shared by the solvers. Matrices here are tiny
//! (active-set sized), so plain Gaussian elimination is enough.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

pub(crate) fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub(crate) fn norm_inf(v: ArrayView1<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn norm1(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_tol` times the largest
/// absolute entry of `a`.
pub(crate) fn solve_square(
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    rel_tol: f64,
) -> Option<Array1<f64>> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if n == 0 {
        return Some(Array1::zeros(0));
    }
    if scale == 0.0 {
        return None;
    }
    let mut m = a.to_owned();
    let mut rhs = b.to_owned();
    for col in 0..n {
        let (piv, pval) =
            (col..n)
                .map(|r| (r, m[[r, col]].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pval <= rel_tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap([piv, k], [col, k]);
            }
            rhs.swap(piv, col);
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[[r, k]] -= f * m[[col, k]];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for k in (r + 1)..n {
            acc -= m[[r, k]] * x[k];
        }
        x[r] = acc / m[[r, r]];
    }
    Some(x)
}

/// Columns of `x` selected by `idx`, in order.
pub(crate) fn select_columns(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), idx.len()));
    for (k, &j) in idx.iter().enumerate() {
        out.column_mut(k).assign(&x.column(j));
    }
    out
}
