//! H-representation of the solution polytopes and their vertex enumeration.
//!
//! A [`Polytope`] is `{x ∈ ℝᵈ : A x = b, sᵢxᵢ ≥ 0, |xᵢ − cᵢ| ≤ l}` where the
//! box is optional. The strong polytope fixes the fitted values through the
//! row space of `X_E`; the relaxed one keeps only the leading right singular
//! directions and adds the box.

mod brute;
mod dd;

use ndarray::{Array1, Array2};

use crate::linalg::norm_inf;
use crate::spectral::thin_svd;
use crate::{Error, Result};

pub use brute::{brute_force_vertices, BRUTE_FORCE_CAP};
pub use dd::{enumerate_vertices, enumerate_vertices_with_cap};

/// Default cap on the reduced dimension `d − k` for vertex enumeration.
pub const DEFAULT_DIM_CAP: usize = 20;

/// Tolerance for consistency of the equality system after rank pruning.
const CONSISTENCY_TOL: f64 = 1e-9;

/// Axis-aligned box `c ± l`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBound {
    pub center: Array1<f64>,
    pub halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    eq_rows: Array2<f64>,
    eq_rhs: Array1<f64>,
    signs: Array1<f64>,
    bounding_box: Option<BoxBound>,
    consistent: bool,
    scale: f64,
}

impl Polytope {
    /// Builds a polytope, pruning the equality rows to a full-row-rank basis
    /// of their row space. An inconsistent equality system yields an empty
    /// polytope rather than an error.
    pub fn new(
        eq_rows: Array2<f64>,
        eq_rhs: Array1<f64>,
        signs: Array1<f64>,
        bounding_box: Option<BoxBound>,
    ) -> Result<Self> {
        let d = signs.len();
        if eq_rows.ncols() != d || eq_rows.nrows() != eq_rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} equality rows, {} right-hand sides, {d} signs",
                eq_rows.nrows(),
                eq_rows.ncols(),
                eq_rhs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidSigns("entries must be -1 or +1".into()));
        }
        if let Some(b) = &bounding_box {
            validate_box(b, d)?;
        }
        let scale = bounding_box
            .as_ref()
            .map(|b| norm_inf(b.center.view()).max(1.0))
            .unwrap_or(1.0);
        let (rows, rhs, consistent) = prune_equalities(&eq_rows, &eq_rhs)?;
        Ok(Self {
            eq_rows: rows,
            eq_rhs: rhs,
            signs,
            bounding_box,
            consistent,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn eq_rows(&self) -> &Array2<f64> {
        &self.eq_rows
    }

    pub fn eq_rhs(&self) -> &Array1<f64> {
        &self.eq_rhs
    }

    pub fn signs(&self) -> &Array1<f64> {
        &self.signs
    }

    pub fn bounding_box(&self) -> Option<&BoxBound> {
        self.bounding_box.as_ref()
    }

    /// False when the equality rows admit no solution at all.
    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    /// Magnitude used to scale tolerances: `max(1, ‖reference‖∞)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Dimension of the affine hull of the equalities, `d − k`.
    pub fn reduced_dim(&self) -> usize {
        self.dim() - self.eq_rows.nrows()
    }

    /// Per-coordinate interval implied by the sign and box constraints.
    pub fn coordinate_bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|i| {
                let (sign_lo, sign_hi) = if self.signs[i] > 0.0 {
                    (0.0, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, 0.0)
                };
                match &self.bounding_box {
                    Some(b) => {
                        let c = b.center[i];
                        (sign_lo.max(c - b.halfwidth), sign_hi.min(c + b.halfwidth))
                    }
                    None => (sign_lo, sign_hi),
                }
            })
            .collect()
    }

    /// Largest constraint violation of `x` (0 when feasible).
    pub fn violation(&self, x: &Array1<f64>) -> f64 {
        let eq = (self.eq_rows.dot(x) - &self.eq_rhs)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let ineq = self
            .coordinate_bounds()
            .iter()
            .zip(x.iter())
            .map(|(&(lo, hi), &xi)| (lo - xi).max(xi - hi).max(0.0))
            .fold(0.0f64, f64::max);
        eq.max(ineq)
    }

    pub fn contains(&self, x: &Array1<f64>, tol: f64) -> bool {
        self.consistent && self.violation(x) <= tol
    }

    pub(crate) fn feasibility_tol(&self) -> f64 {
        1e-9 * self.scale
    }

    fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale.max(1.0);
        self
    }
}

fn validate_box(b: &BoxBound, d: usize) -> Result<()> {
    if b.center.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "box center has {} entries, expected {d}",
            b.center.len()
        )));
    }
    if !(b.halfwidth >= 0.0 && b.halfwidth.is_finite()) || b.center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidBox(format!("halfwidth {}", b.halfwidth)));
    }
    Ok(())
}

/// Replaces `A x = b` by an orthonormal basis of the row space of `A` with
/// the matching right-hand side, reporting whether `b` lies in the range.
fn prune_equalities(a: &Array2<f64>, b: &Array1<f64>) -> Result<(Array2<f64>, Array1<f64>, bool)> {
    let d = a.ncols();
    if a.nrows() == 0 || d == 0 || a.iter().all(|&v| v == 0.0) {
        let consistent = b
            .iter()
            .all(|v| v.abs() <= CONSISTENCY_TOL * norm_inf(b.view()).max(1.0));
        return Ok((Array2::zeros((0, d)), Array1::zeros(0), consistent));
    }
    let svd = thin_svd(a)?;
    let r = svd.rank;
    let mut rows = Array2::zeros((r, d));
    let mut rhs = Array1::zeros(r);
    let mut fitted = Array1::<f64>::zeros(b.len());
    for k in 0..r {
        let u = svd.u.column(k);
        let coef = u.dot(b);
        rows.row_mut(k).assign(&svd.v.column(k));
        rhs[k] = coef / svd.sigma[k];
        fitted.scaled_add(coef, &u);
    }
    let resid = norm_inf((b - &fitted).view());
    let consistent = resid <= CONSISTENCY_TOL * norm_inf(b.view()).max(1.0);
    Ok((rows, rhs, consistent))
}

fn check_signs(beta_e: &Array1<f64>, s: &Array1<f64>) -> Result<()> {
    if beta_e.len() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients but {} signs",
            beta_e.len(),
            s.len()
        )));
    }
    for (i, (&b, &si)) in beta_e.iter().zip(s.iter()).enumerate() {
        if (si != 1.0 && si != -1.0) || b * si <= 0.0 {
            return Err(Error::InvalidSigns(format!(
                "coordinate {i}: beta {b}, sign {si}"
            )));
        }
    }
    Ok(())
}

/// `{x : X_E x = X_E β̂_E, S x ≥ 0}`, with the equalities written through
/// the numeric-rank right singular vectors of `X_E`.
pub fn build_strong_polytope(
    x_e: &Array2<f64>,
    beta_e: &Array1<f64>,
    s: &Array1<f64>,
) -> Result<Polytope> {
    if x_e.ncols() != beta_e.len() {
        return Err(Error::DimensionMismatch(format!(
            "X_E has {} columns, beta_E has {} entries",
            x_e.ncols(),
            beta_e.len()
        )));
    }
    check_signs(beta_e, s)?;
    let svd = thin_svd(x_e)?;
    let (v_plus, _) = crate::spectral::restriction_matrix(&svd, svd.rank)?;
    let rows = v_plus.t().to_owned();
    let rhs = rows.dot(beta_e);
    Ok(Polytope {
        eq_rows: rows,
        eq_rhs: rhs,
        signs: s.clone(),
        bounding_box: None,
        consistent: true,
        scale: 1.0,
    }
    .with_scale(norm_inf(beta_e.view())))
}

/// `{x ∈ β̂_E + [−l, l]^d : V*ᵀ(x − β̂_E) = 0, S x ≥ 0}`.
pub fn build_relaxed_polytope(
    v_star: &Array2<f64>,
    beta_e: &Array1<f64>,
    s: &Array1<f64>,
    l: f64,
) -> Result<Polytope> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidBox(format!(
            "box halfwidth must be > 0, got {l}"
        )));
    }
    if v_star.nrows() != beta_e.len() {
        return Err(Error::DimensionMismatch(format!(
            "V* has {} rows, beta_E has {} entries",
            v_star.nrows(),
            beta_e.len()
        )));
    }
    check_signs(beta_e, s)?;
    let rows = v_star.t().to_owned();
    let rhs = rows.dot(beta_e);
    Ok(Polytope {
        eq_rows: rows,
        eq_rhs: rhs,
        signs: s.clone(),
        bounding_box: Some(BoxBound {
            center: beta_e.clone(),
            halfwidth: l,
        }),
        consistent: true,
        scale: 1.0,
    }
    .with_scale(norm_inf(beta_e.view())))
}

/// Snaps coordinates sitting on a bound onto it, drops infeasible points,
/// deduplicates within `1e-9·scale` (L∞) and sorts lexicographically.
pub(crate) fn finalize_vertices(p: &Polytope, raw: Vec<Array1<f64>>) -> Vec<Array1<f64>> {
    let tol = p.feasibility_tol();
    let bounds = p.coordinate_bounds();
    let mut pts: Vec<Array1<f64>> = raw
        .into_iter()
        .map(|mut x| {
            for (xi, &(lo, hi)) in x.iter_mut().zip(bounds.iter()) {
                if (*xi - lo).abs() <= tol {
                    *xi = lo;
                } else if (*xi - hi).abs() <= tol {
                    *xi = hi;
                }
            }
            x
        })
        .filter(|x| p.violation(x) <= 10.0 * tol)
        .collect();
    pts.sort_by(lex_cmp);
    if p.dim() == 0 {
        pts.truncate(1);
        return pts;
    }
    let mut kept: Vec<Array1<f64>> = Vec::with_capacity(pts.len());
    for x in pts {
        // candidates within tolerance share a first coordinate within tol
        let dup = kept
            .iter()
            .rev()
            .take_while(|k| x[0] - k[0] <= tol)
            .any(|k| linf_dist(k, &x) <= tol);
        if !dup {
            kept.push(x);
        }
    }
    kept
}

pub(crate) fn lex_cmp(a: &Array1<f64>, b: &Array1<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub(crate) fn linf_dist(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
