//! Basis-enumeration oracle: every choice of `d − k` inequality rows is
//! turned into equalities and the square system solved directly in the
//! original coordinates.

use ndarray::{Array1, Array2};

use super::{finalize_vertices, Polytope};
use crate::linalg::solve_square;
use crate::{Error, Result};

/// Largest reduced dimension the oracle accepts.
pub const BRUTE_FORCE_CAP: usize = 8;

/// Vertices of `p` by exhaustive basis enumeration over the full list of
/// sign constraints and box faces. Same output contract as
/// [`super::enumerate_vertices`].
pub fn brute_force_vertices(p: &Polytope) -> Result<Vec<Array1<f64>>> {
    let d = p.dim();
    let k = p.eq_rows().nrows();
    let r = d - k;
    if r > BRUTE_FORCE_CAP {
        return Err(Error::DimensionTooLarge {
            dim: r,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if !p.is_consistent() {
        return Ok(Vec::new());
    }

    // inequality rows as (coordinate, value): x_i = value when tight
    let mut faces: Vec<(usize, f64)> = (0..d).map(|i| (i, 0.0)).collect();
    if let Some(b) = p.bounding_box() {
        for i in 0..d {
            faces.push((i, b.center[i] - b.halfwidth));
            faces.push((i, b.center[i] + b.halfwidth));
        }
    }
    let tol = p.feasibility_tol();
    let feasible = |x: &Array1<f64>| {
        let signs_ok = x.iter().zip(p.signs().iter()).all(|(xi, s)| s * xi >= -tol);
        let box_ok = p.bounding_box().is_none_or(|b| {
            x.iter()
                .zip(b.center.iter())
                .all(|(xi, c)| (xi - c).abs() <= b.halfwidth + tol)
        });
        let eq_ok = (p.eq_rows().dot(x) - p.eq_rhs())
            .iter()
            .all(|v| v.abs() <= tol);
        signs_ok && box_ok && eq_ok
    };

    let mut found = Vec::new();
    let mut system = Array2::zeros((d, d));
    let mut rhs = Array1::zeros(d);
    system.slice_mut(ndarray::s![..k, ..]).assign(p.eq_rows());
    rhs.slice_mut(ndarray::s![..k]).assign(p.eq_rhs());
    for subset in Combinations::new(faces.len(), r) {
        for (row, &f) in subset.iter().enumerate() {
            let (i, value) = faces[f];
            let mut line = system.row_mut(k + row);
            line.fill(0.0);
            line[i] = 1.0;
            rhs[k + row] = value;
        }
        if let Some(x) = solve_square(system.view(), rhs.view(), 1e-12) {
            if feasible(&x) {
                found.push(x);
            }
        }
    }
    Ok(finalize_vertices(p, found))
}

/// Lexicographic r-subsets of `0..n`.
struct Combinations {
    idx: Vec<usize>,
    n: usize,
    done: bool,
}

impl Combinations {
    fn new(n: usize, r: usize) -> Self {
        Self {
            idx: (0..r).collect(),
            n,
            done: r > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let r = self.idx.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - r + i {
                self.idx[i] += 1;
                for j in (i + 1)..r {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
