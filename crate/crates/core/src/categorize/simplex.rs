//! Dense two-phase simplex with Bland's rule over a [`Polytope`].

use ndarray::{Array1, Array2};

use crate::polytope::Polytope;
use crate::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// Optimizes `cᵀx` over `p`; returns an optimal vertex and its value.
///
/// Each coordinate is shifted to its finite sign/box end, `xᵢ = aᵢ + tᵢzᵢ`
/// with `z ≥ 0`, so the problem becomes a standard-form LP in `z`.
pub fn solve_lp(
    objective: &Array1<f64>,
    p: &Polytope,
    maximize: bool,
) -> Result<(Array1<f64>, f64)> {
    let d = p.dim();
    if objective.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} entries, polytope dimension is {d}",
            objective.len()
        )));
    }
    if !p.is_consistent() {
        return Err(Error::Infeasible);
    }
    let tol = p.feasibility_tol();
    let bounds = p.coordinate_bounds();
    let mut anchor = Array1::zeros(d);
    let mut dir = Array1::zeros(d);
    let mut widths: Vec<(usize, f64)> = Vec::new();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if lo > hi + tol {
            return Err(Error::Infeasible);
        }
        if lo.is_finite() {
            anchor[i] = lo;
            dir[i] = 1.0;
        } else {
            anchor[i] = hi;
            dir[i] = -1.0;
        }
        if lo.is_finite() && hi.is_finite() {
            widths.push((i, (hi - lo).max(0.0)));
        }
    }

    let a = p.eq_rows();
    let k = a.nrows();
    let nb = widths.len();
    let m = k + nb;
    // columns: z (d), box slacks (nb), artificials (k), rhs
    let ncols = d + nb + k;
    let rhs_col = ncols;
    let mut t = Array2::<f64>::zeros((m + 1, ncols + 1));
    let mut basis = vec![0usize; m];
    let shifted = p.eq_rhs() - &a.dot(&anchor);
    for r in 0..k {
        let flip = if shifted[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            t[[r, j]] = flip * a[[r, j]] * dir[j];
        }
        t[[r, d + nb + r]] = 1.0;
        t[[r, rhs_col]] = flip * shifted[r];
        basis[r] = d + nb + r;
    }
    for (q, &(i, w)) in widths.iter().enumerate() {
        let r = k + q;
        t[[r, i]] = 1.0;
        t[[r, d + q]] = 1.0;
        t[[r, rhs_col]] = w;
        basis[r] = d + q;
    }

    let mut tab = Tableau {
        t,
        basis,
        m,
        rhs_col,
    };
    if k > 0 {
        // phase 1: minimize the sum of artificials
        for r in 0..k {
            for j in 0..=ncols {
                let v = tab.t[[r, j]];
                tab.t[[m, j]] -= v;
            }
        }
        for r in 0..k {
            tab.t[[m, d + nb + r]] = 0.0;
        }
        tab.run(d + nb + k)?;
        let infeas = -tab.t[[m, rhs_col]];
        if infeas > tol.max(1e-9) {
            return Err(Error::Infeasible);
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= d + nb {
                if let Some(j) = (0..d + nb).find(|&j| tab.t[[r, j]].abs() > 1e-9) {
                    tab.pivot(r, j);
                }
            }
        }
    }

    let sense = if maximize { -1.0 } else { 1.0 };
    tab.t.row_mut(m).fill(0.0);
    for j in 0..d {
        tab.t[[m, j]] = sense * objective[j] * dir[j];
    }
    for r in 0..m {
        let b = tab.basis[r];
        let cb = tab.t[[m, b]];
        if cb != 0.0 {
            for j in 0..=ncols {
                let v = tab.t[[r, j]];
                tab.t[[m, j]] -= cb * v;
            }
        }
    }
    tab.run(d + nb)?;

    let mut z = Array1::<f64>::zeros(d);
    for r in 0..m {
        if tab.basis[r] < d {
            z[tab.basis[r]] = tab.t[[r, rhs_col]].max(0.0);
        }
    }
    let x = &anchor + &(&dir * &z);
    let value = objective.dot(&x);
    Ok((x, value))
}

struct Tableau {
    t: Array2<f64>,
    basis: Vec<usize>,
    m: usize,
    rhs_col: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.t[[r, c]];
        self.t.row_mut(r).mapv_inplace(|v| v / pv);
        let prow = self.t.row(r).to_owned();
        for i in 0..=self.m {
            if i != r {
                let f = self.t[[i, c]];
                if f != 0.0 {
                    self.t.row_mut(i).scaled_add(-f, &prow);
                    self.t[[i, c]] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes with entering candidates restricted to columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..allowed).find(|&j| self.t[[self.m, j]] < -PIVOT_EPS) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[[r, c]];
                if a > PIVOT_EPS {
                    let ratio = self.t[[r, self.rhs_col]].max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            let tie = (ratio - bv).abs() <= 1e-12 * bv.abs().max(1.0);
                            if ratio < bv && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(Error::NoConvergence {
            iterations: MAX_PIVOTS,
        })
    }
}
