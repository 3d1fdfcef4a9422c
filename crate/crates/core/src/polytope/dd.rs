//! Vertex enumeration by the double description method.
//!
//! The equalities are eliminated by writing `x = x₀ + N z` with `N` an
//! orthonormal null-space basis. The remaining interval constraints become
//! `G z ≤ h`, which is homogenized into the pointed cone
//! `{(z, t) : G z − h t ≤ 0, t ≥ 0}`. Extreme rays with `t > 0` are the
//! vertices; rays with `t = 0` are recession directions.

use ndarray::{Array1, Array2};

use super::{finalize_vertices, Polytope, DEFAULT_DIM_CAP};
use crate::linalg::solve_square;
use crate::spectral::thin_svd;
use crate::{Error, Result};

const ZERO_TOL: f64 = 1e-10;

/// Vertices of `p`, deduplicated and sorted lexicographically, with the
/// default reduced-dimension cap.
pub fn enumerate_vertices(p: &Polytope) -> Result<Vec<Array1<f64>>> {
    enumerate_vertices_with_cap(p, DEFAULT_DIM_CAP)
}

pub fn enumerate_vertices_with_cap(p: &Polytope, dim_cap: usize) -> Result<Vec<Array1<f64>>> {
    let r = p.reduced_dim();
    if r > dim_cap {
        return Err(Error::DimensionTooLarge {
            dim: r,
            cap: dim_cap,
        });
    }
    if !p.is_consistent() {
        return Ok(Vec::new());
    }
    let (x0, basis) = affine_parameterization(p)?;
    let tol = p.feasibility_tol();

    // interval constraints in reduced coordinates: g·z ≤ h
    let mut rows: Vec<(Array1<f64>, f64)> = Vec::new();
    for (i, &(lo, hi)) in p.coordinate_bounds().iter().enumerate() {
        let g = basis.row(i).to_owned();
        let g_norm = g.dot(&g).sqrt();
        for (sign, bound) in [(-1.0, lo), (1.0, hi)] {
            if !bound.is_finite() {
                continue;
            }
            let h = sign * (bound - x0[i]);
            if g_norm <= 1e-12 {
                if h < -tol {
                    return Ok(Vec::new());
                }
                continue;
            }
            rows.push((&g * (sign / g_norm), h / g_norm));
        }
    }

    if r == 0 {
        return Ok(finalize_vertices(p, vec![x0]));
    }

    let rays = double_description(&rows, r)?;
    let mut vertices = Vec::new();
    let mut recession = false;
    for w in rays {
        let t = w[r];
        if t > ZERO_TOL {
            let z = w.slice(ndarray::s![..r]).mapv(|v| v / t);
            vertices.push(&x0 + &basis.dot(&z));
        } else {
            recession = true;
        }
    }
    if vertices.is_empty() {
        return Ok(Vec::new());
    }
    if recession {
        return Err(Error::Unbounded);
    }
    Ok(finalize_vertices(p, vertices))
}

/// A particular solution of the equalities and an orthonormal basis of
/// their null space.
fn affine_parameterization(p: &Polytope) -> Result<(Array1<f64>, Array2<f64>)> {
    let d = p.dim();
    let k = p.eq_rows().nrows();
    if k == 0 {
        return Ok((Array1::zeros(d), Array2::eye(d)));
    }
    let svd = thin_svd(p.eq_rows())?;
    let rank = svd.rank;
    let mut x0 = Array1::zeros(d);
    for j in 0..rank {
        let coef = svd.u.column(j).dot(p.eq_rhs()) / svd.sigma[j];
        x0.scaled_add(coef, &svd.v.column(j));
    }
    let null = svd.v.slice(ndarray::s![.., rank..]).to_owned();
    Ok((x0, null))
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    w: Array1<f64>,
    zeros: Bits,
}

fn normalized(w: Array1<f64>) -> Array1<f64> {
    let n = w.dot(&w).sqrt();
    w / n
}

/// Extreme rays (unit norm) of `{(z, t) : g·z − h·t ≤ 0 ∀ rows, t ≥ 0}`.
fn double_description(rows: &[(Array1<f64>, f64)], r: usize) -> Result<Vec<Array1<f64>>> {
    let dim = r + 1;
    // row 0 is t ≥ 0, i.e. −t ≤ 0
    let mut cone: Vec<Array1<f64>> = Vec::with_capacity(rows.len() + 1);
    let mut t_row = Array1::zeros(dim);
    t_row[r] = -1.0;
    cone.push(t_row);
    for (g, h) in rows {
        let mut a = Array1::zeros(dim);
        a.slice_mut(ndarray::s![..r]).assign(g);
        a[r] = -h;
        let a = normalized(a);
        let duplicate = cone
            .iter()
            .any(|c| c.iter().zip(a.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));
        if !duplicate {
            cone.push(a);
        }
    }
    let m = cone.len();

    let basis = independent_rows(&cone, dim);
    if basis.len() < dim {
        // a lineality space: the polyhedron is not pointed
        return Err(Error::Unbounded);
    }
    let mut b = Array2::zeros((dim, dim));
    for (k, &i) in basis.iter().enumerate() {
        b.row_mut(k).assign(&cone[i]);
    }
    let mut rays = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut e = Array1::zeros(dim);
        e[k] = -1.0;
        let w = solve_square(b.view(), e.view(), 1e-14).ok_or(Error::Unbounded)?;
        let mut zeros = Bits::new(m);
        for (kk, &i) in basis.iter().enumerate() {
            if kk != k {
                zeros.set(i);
            }
        }
        rays.push(Ray {
            w: normalized(w),
            zeros,
        });
    }

    let in_basis: Vec<bool> = (0..m).map(|i| basis.contains(&i)).collect();
    for j in (0..m).filter(|&j| !in_basis[j]) {
        let a = &cone[j];
        let vals: Vec<f64> = rays.iter().map(|ray| a.dot(&ray.w)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > ZERO_TOL).collect();
        if pos.is_empty() {
            for (ray, &v) in rays.iter_mut().zip(&vals) {
                if v.abs() <= ZERO_TOL {
                    ray.zeros.set(j);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -ZERO_TOL).collect();

        let mut created = Vec::new();
        for &ip in &pos {
            for &in_ in &neg {
                let common = rays[ip].zeros.and(&rays[in_].zeros);
                if (common.count() as usize) + 2 < dim {
                    continue;
                }
                let adjacent = !rays
                    .iter()
                    .enumerate()
                    .any(|(q, ray)| q != ip && q != in_ && common.is_subset_of(&ray.zeros));
                if !adjacent {
                    continue;
                }
                let w = &rays[in_].w * vals[ip] - &rays[ip].w * vals[in_];
                let mut zeros = common;
                zeros.set(j);
                created.push(Ray {
                    w: normalized(w),
                    zeros,
                });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() - pos.len() + created.len());
        for (i, mut ray) in rays.into_iter().enumerate() {
            if vals[i] > ZERO_TOL {
                continue;
            }
            if vals[i].abs() <= ZERO_TOL {
                ray.zeros.set(j);
            }
            next.push(ray);
        }
        next.extend(created);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.w).collect())
}

/// Greedy choice of linearly independent rows, starting from row 0.
fn independent_rows(rows: &[Array1<f64>], dim: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(dim);
    let mut ortho: Vec<Array1<f64>> = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &ortho {
                let c = q.dot(&v);
                v.scaled_add(-c, q);
            }
        }
        let n = v.dot(&v).sqrt();
        if n > 1e-8 {
            ortho.push(v / n);
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}
