//! Performance metrics, the relaxed-equivalence predicate and enumeration of
//! equivalent Lasso solutions over the relaxed and strong polytopes.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::lasso::{log1p_exp, support_of, LassoSolution};
use crate::linalg::{norm_inf, select_columns};
use crate::polytope::{
    build_relaxed_polytope, build_strong_polytope, enumerate_vertices_with_cap, lex_cmp, linf_dist,
    Polytope, DEFAULT_DIM_CAP,
};
use crate::spectral::{dev_bound, restriction_matrix, rmse_bound, thin_svd, SpectralData};
use crate::{Error, Result, Task};

/// Relative rounding allowance used by the equivalence threshold, so that
/// points equal to the reference in exact arithmetic pass at `tol = 0`.
const ROUNDING_ALLOWANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Rmse,
    Deviance,
}

impl Metric {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => Metric::Rmse,
            Task::Classification => Metric::Deviance,
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Rmse => "rmse",
            Metric::Deviance => "deviance",
        })
    }
}

fn check(beta: &Array1<f64>, x: &Array2<f64>, y: &Array1<f64>) -> Result<()> {
    if x.nrows() != y.len() || x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, y has {}, beta has {}",
            x.nrows(),
            x.ncols(),
            y.len(),
            beta.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::DimensionMismatch("no samples".into()));
    }
    Ok(())
}

/// `‖y − Xβ‖₂ / √n`.
pub fn rmse(beta: &Array1<f64>, x: &Array2<f64>, y: &Array1<f64>) -> Result<f64> {
    check(beta, x, y)?;
    let r = y - &x.dot(beta);
    Ok((r.dot(&r) / y.len() as f64).sqrt())
}

/// Mean deviance `(1/n)·Σ[−yᵢηᵢ + log(1 + e^ηᵢ)]`, `η = Xβ + b₀`.
pub fn deviance(
    beta: &Array1<f64>,
    intercept: f64,
    x: &Array2<f64>,
    y: &Array1<f64>,
) -> Result<f64> {
    check(beta, x, y)?;
    let eta = x.dot(beta) + intercept;
    let total: f64 = eta
        .iter()
        .zip(y.iter())
        .map(|(&e, &yi)| log1p_exp(e) - yi * e)
        .sum();
    Ok(total / y.len() as f64)
}

/// Metric of `beta` with the reference intercept held fixed.
pub fn metric_value(
    metric: Metric,
    beta: &Array1<f64>,
    intercept: f64,
    x: &Array2<f64>,
    y: &Array1<f64>,
) -> Result<f64> {
    match metric {
        Metric::Rmse => {
            check(beta, x, y)?;
            let r = y - &x.dot(beta) - intercept;
            Ok((r.dot(&r) / y.len() as f64).sqrt())
        }
        Metric::Deviance => deviance(beta, intercept, x, y),
    }
}

/// Largest metric value still counted as equivalent: `(1+tol)·D_ref`, or
/// `D_ref` plus a relative rounding allowance of `1e-12` when that is larger.
pub fn equivalence_threshold(reference_metric: f64, tol: f64) -> f64 {
    ((1.0 + tol) * reference_metric).max(reference_metric * (1.0 + ROUNDING_ALLOWANCE))
}

/// True when `supp(β) ⊆ supp(β̂)` and `D(β) ≤ (1+tol)·D(β̂)`.
pub fn is_equivalent(
    beta: &Array1<f64>,
    reference: &LassoSolution,
    metric: Metric,
    tol: f64,
    x: &Array2<f64>,
    y: &Array1<f64>,
) -> bool {
    if support_of(beta)
        .iter()
        .any(|j| reference.support.binary_search(j).is_err())
    {
        return false;
    }
    let (Ok(d), Ok(d_ref)) = (
        metric_value(metric, beta, reference.intercept, x, y),
        metric_value(metric, &reference.beta, reference.intercept, x, y),
    ) else {
        return false;
    };
    d <= equivalence_threshold(d_ref, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalentSolution {
    #[serde(with = "crate::lasso::array1_serde")]
    pub beta: Array1<f64>,
    pub support: Vec<usize>,
    pub metric_value: f64,
}

/// Worst-case metric over the final relaxed polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBound {
    /// Box halfwidth `l = ‖β̂‖∞`.
    pub l: f64,
    /// Discarded singular values at the final `i*`.
    pub sigma_bar: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalentSolutionSet {
    pub metric: Metric,
    pub tol: f64,
    pub i_star_final: usize,
    pub reference_metric: f64,
    /// Deduplicated and sorted lexicographically by `beta`.
    pub solutions: Vec<EquivalentSolution>,
    /// `None` for the strong set.
    pub bound: Option<MetricBound>,
    pub reference: LassoSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedOptions {
    pub tol: f64,
    pub d_max: usize,
    /// Return only the last iteration whose vertices all passed.
    pub strict_break: bool,
    pub dim_cap: usize,
}

impl Default for RelaxedOptions {
    fn default() -> Self {
        Self {
            tol: 0.01,
            d_max: 12,
            strict_break: false,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

fn check_metric(metric: Metric, task: Task) -> Result<()> {
    if metric == Metric::Deviance && task == Task::Regression {
        return Err(Error::InvalidConfig(
            "deviance metric requires a classification task".into(),
        ));
    }
    Ok(())
}

/// Active-set view of a reference solution.
struct ActiveSet {
    support: Vec<usize>,
    beta_e: Array1<f64>,
    s: Array1<f64>,
    x_e: Array2<f64>,
    p: usize,
}

impl ActiveSet {
    fn new(reference: &LassoSolution, x: &Array2<f64>) -> Result<Self> {
        if reference.support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if reference.beta.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "reference has {} coefficients, X has {} columns",
                reference.beta.len(),
                x.ncols()
            )));
        }
        Ok(Self {
            support: reference.support.clone(),
            beta_e: reference.beta_support(),
            s: reference.sign_vector(),
            x_e: select_columns(x.view(), &reference.support),
            p: x.ncols(),
        })
    }

    fn embed(&self, v: &Array1<f64>) -> Array1<f64> {
        let mut b = Array1::zeros(self.p);
        for (k, &j) in self.support.iter().enumerate() {
            b[j] = v[k];
        }
        b
    }
}

/// The relaxed polytope at `i_star` for `reference`, in active-set
/// coordinates.
pub fn relaxed_polytope_at(
    reference: &LassoSolution,
    spectral: &SpectralData,
    i_star: usize,
) -> Result<Polytope> {
    let beta_e = reference.beta_support();
    let (v, _) = restriction_matrix(spectral, i_star)?;
    build_relaxed_polytope(
        &v,
        &beta_e,
        &reference.sign_vector(),
        norm_inf(beta_e.view()),
    )
}

/// Worst-case metric over the relaxed polytope at `i_star`.
pub fn metric_bound(
    metric: Metric,
    reference: &LassoSolution,
    spectral: &SpectralData,
    i_star: usize,
    n: usize,
    reference_metric: f64,
) -> Result<MetricBound> {
    let (_, sigma_bar) = restriction_matrix(spectral, i_star)?;
    let l = norm_inf(reference.beta_support().view());
    let sb = sigma_bar.to_vec();
    let e = reference.support.len();
    let value = match metric {
        Metric::Rmse => rmse_bound(l, &sb, e, n, reference_metric),
        Metric::Deviance => dev_bound(l, &sb, e, n, reference_metric),
    };
    Ok(MetricBound {
        l,
        sigma_bar: sb,
        value,
    })
}

/// Relaxed enumeration: for `i = 1..d_max` drop the `i` trailing right
/// singular directions, enumerate the vertices of the relaxed polytope and
/// stop at the first iteration with a vertex above the threshold.
///
/// Without `strict_break` the passing vertices of that last iteration are
/// kept too; the reference is always included. `i_star_final` is the
/// smallest `i*` that contributed solutions, so every solution obeys the
/// bound reported for it.
pub fn enumerate_relaxed(
    reference: &LassoSolution,
    metric: Metric,
    x: &Array2<f64>,
    y: &Array1<f64>,
    opts: &RelaxedOptions,
) -> Result<EquivalentSolutionSet> {
    if !(opts.tol >= 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tol must be finite and >= 0, got {}",
            opts.tol
        )));
    }
    if opts.d_max == 0 {
        return Err(Error::InvalidConfig("d_max must be >= 1".into()));
    }
    check_metric(metric, reference.task)?;
    let active = ActiveSet::new(reference, x)?;
    let spectral = thin_svd(&active.x_e)?;
    let e = active.support.len();
    let intercept = reference.intercept;
    let d_ref = metric_value(metric, &reference.beta, intercept, x, y)?;
    let threshold = equivalence_threshold(d_ref, opts.tol);

    let mut kept: Vec<EquivalentSolution> = vec![solution(reference.beta.clone(), d_ref)];
    let mut i_star_final = e;
    for i in 1..=opts.d_max.min(e) {
        let i_star = e - i;
        let poly = relaxed_polytope_at(reference, &spectral, i_star)?;
        let verts = enumerate_vertices_with_cap(&poly, opts.dim_cap)?;
        let mut passing = Vec::with_capacity(verts.len());
        let mut violated = false;
        for v in &verts {
            let beta = active.embed(v);
            let d = metric_value(metric, &beta, intercept, x, y)?;
            if d <= threshold {
                passing.push(solution(beta, d));
            } else {
                violated = true;
            }
        }
        if violated {
            if !opts.strict_break && !passing.is_empty() {
                kept.extend(passing);
                i_star_final = i_star;
            }
            break;
        }
        kept.extend(passing);
        i_star_final = i_star;
    }

    let bound = metric_bound(metric, reference, &spectral, i_star_final, x.nrows(), d_ref)?;
    Ok(EquivalentSolutionSet {
        metric,
        tol: opts.tol,
        i_star_final,
        reference_metric: d_ref,
        solutions: dedup_sorted(kept, norm_inf(active.beta_e.view())),
        bound: Some(bound),
        reference: reference.clone(),
    })
}

/// Equivalent vertices of the relaxed polytope at a single `i_star`, plus
/// the reference.
pub fn enumerate_level(
    reference: &LassoSolution,
    metric: Metric,
    x: &Array2<f64>,
    y: &Array1<f64>,
    i_star: usize,
    tol: f64,
    dim_cap: usize,
) -> Result<EquivalentSolutionSet> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tol must be finite and >= 0, got {tol}"
        )));
    }
    check_metric(metric, reference.task)?;
    let active = ActiveSet::new(reference, x)?;
    if i_star > active.support.len() {
        return Err(Error::IndexOutOfRange(format!(
            "i* = {i_star} exceeds the support size {}",
            active.support.len()
        )));
    }
    let spectral = thin_svd(&active.x_e)?;
    let d_ref = metric_value(metric, &reference.beta, reference.intercept, x, y)?;
    let threshold = equivalence_threshold(d_ref, tol);
    let poly = relaxed_polytope_at(reference, &spectral, i_star)?;
    let mut kept = vec![solution(reference.beta.clone(), d_ref)];
    for v in enumerate_vertices_with_cap(&poly, dim_cap)? {
        let beta = active.embed(&v);
        let d = metric_value(metric, &beta, reference.intercept, x, y)?;
        if d <= threshold {
            kept.push(solution(beta, d));
        }
    }
    let bound = metric_bound(metric, reference, &spectral, i_star, x.nrows(), d_ref)?;
    Ok(EquivalentSolutionSet {
        metric,
        tol,
        i_star_final: i_star,
        reference_metric: d_ref,
        solutions: dedup_sorted(kept, norm_inf(active.beta_e.view())),
        bound: Some(bound),
        reference: reference.clone(),
    })
}

/// All vertices of the strong polytope `{X_E x = X_E β̂_E, Sx ≥ 0}`.
pub fn enumerate_strong(
    reference: &LassoSolution,
    metric: Metric,
    x: &Array2<f64>,
    y: &Array1<f64>,
    dim_cap: usize,
) -> Result<EquivalentSolutionSet> {
    check_metric(metric, reference.task)?;
    let active = ActiveSet::new(reference, x)?;
    let poly = build_strong_polytope(&active.x_e, &active.beta_e, &active.s)?;
    let verts = enumerate_vertices_with_cap(&poly, dim_cap)?;
    let d_ref = metric_value(metric, &reference.beta, reference.intercept, x, y)?;
    let mut kept = Vec::with_capacity(verts.len());
    for v in &verts {
        let beta = active.embed(v);
        let d = metric_value(metric, &beta, reference.intercept, x, y)?;
        kept.push(solution(beta, d));
    }
    Ok(EquivalentSolutionSet {
        metric,
        tol: 0.0,
        i_star_final: poly.dim() - poly.reduced_dim(),
        reference_metric: d_ref,
        solutions: dedup_sorted(kept, norm_inf(active.beta_e.view())),
        bound: None,
        reference: reference.clone(),
    })
}

fn solution(beta: Array1<f64>, metric_value: f64) -> EquivalentSolution {
    EquivalentSolution {
        support: support_of(&beta),
        beta,
        metric_value,
    }
}

fn dedup_sorted(mut sols: Vec<EquivalentSolution>, scale: f64) -> Vec<EquivalentSolution> {
    let tol = 1e-9 * scale.max(1.0);
    sols.sort_by(|a, b| lex_cmp(&a.beta, &b.beta));
    let mut out: Vec<EquivalentSolution> = Vec::with_capacity(sols.len());
    for s in sols {
        if !out.iter().any(|k| linf_dist(&k.beta, &s.beta) <= tol) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array1, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::lasso::{default_ridge, fit_logistic_reference, fit_reference, lambda_max};
    use crate::polytope::brute_force_vertices;

    fn random_regression(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let beta: Array1<f64> = (0..p)
            .map(|j| if j < 3 { 1.0 - j as f64 * 0.4 } else { 0.0 })
            .collect();
        let mut y = x.dot(&beta) + &Array1::from_shape_fn(n, |_| rng.gen_range(-0.5..0.5));
        let m = y.mean().unwrap();
        y.mapv_inplace(|v| v - m);
        (x, y)
    }

    fn reference_fit(x: &Array2<f64>, y: &Array1<f64>, frac: f64) -> LassoSolution {
        let lam = frac * lambda_max(x, y, Task::Regression);
        fit_reference(x, y, lam, default_ridge(lam)).unwrap()
    }

    #[test]
    fn rmse_examples() {
        let x = Array2::zeros((2, 1));
        let r = rmse(&array![0.0], &x, &array![3.0, 4.0]).unwrap();
        assert!((r - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        let x = array![[1.0], [2.0]];
        assert_eq!(rmse(&array![2.0], &x, &array![2.0, 4.0]).unwrap(), 0.0);
        assert!(rmse(&array![1.0, 2.0], &x, &array![2.0, 4.0]).is_err());
    }

    #[test]
    fn deviance_examples() {
        let x = array![[1.0], [-1.0]];
        let d = deviance(&array![0.0], 0.0, &x, &array![1.0, 0.0]).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        let one = array![[1.0]];
        assert!(deviance(&array![50.0], 0.0, &one, &array![1.0]).unwrap() < 1e-20);
        let d = deviance(&array![-50.0], 0.0, &one, &array![1.0]).unwrap();
        assert!((d - 50.0).abs() < 1e-12 && d.is_finite());
        let d = deviance(&array![-1000.0], 0.0, &one, &array![1.0]).unwrap();
        assert!((d - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn equivalence_predicate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = random_regression(&mut rng, 30, 6);
        let r = reference_fit(&x, &y, 0.2);
        for tol in [0.0, 0.01, 1.0] {
            assert!(is_equivalent(&r.beta, &r, Metric::Rmse, tol, &x, &y));
        }
        let off = (0..6)
            .find(|j| !r.support.contains(j))
            .expect("some zero coefficient");
        let mut b = r.beta.clone();
        b[off] = 1e-3;
        assert!(!is_equivalent(&b, &r, Metric::Rmse, 100.0, &x, &y));
    }

    #[test]
    fn full_rank_tol_zero_strict_is_reference_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, y) = random_regression(&mut rng, 40, 5);
        let r = reference_fit(&x, &y, 0.1);
        let opts = RelaxedOptions {
            tol: 0.0,
            d_max: 1,
            strict_break: true,
            ..Default::default()
        };
        let set = enumerate_relaxed(&r, Metric::Rmse, &x, &y, &opts).unwrap();
        assert_eq!(set.solutions.len(), 1);
        assert_eq!(set.solutions[0].beta, r.beta);
        assert_eq!(set.i_star_final, r.support.len());

        // the default mode may add a vertex, but never one worse than the reference
        let loose = enumerate_relaxed(
            &r,
            Metric::Rmse,
            &x,
            &y,
            &RelaxedOptions {
                strict_break: false,
                ..opts
            },
        )
        .unwrap();
        for s in &loose.solutions {
            assert!(s.metric_value <= equivalence_threshold(loose.reference_metric, 0.0));
        }
    }

    fn dup_data() -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let base = Array2::from_shape_fn((n, 3), |_| rng.gen_range(-1.0..1.0));
        let mut x = Array2::zeros((n, 4));
        x.column_mut(0).assign(&base.column(0));
        x.column_mut(1).assign(&base.column(0));
        x.column_mut(2).assign(&base.column(1));
        x.column_mut(3).assign(&base.column(2));
        let mut y: Array1<f64> = 2.0 * &base.column(0) - 1.0 * &base.column(1)
            + 0.1 * &Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
        let m = y.mean().unwrap();
        y.mapv_inplace(|v| v - m);
        (x, y)
    }

    #[test]
    fn duplicated_columns_relaxed() {
        let (x, y) = dup_data();
        let r = reference_fit(&x, &y, 0.05);
        assert!(r.support.contains(&0) && r.support.contains(&1));
        let mass = r.beta[0] + r.beta[1];
        let opts = RelaxedOptions {
            tol: 0.0,
            ..Default::default()
        };
        let set = enumerate_relaxed(&r, Metric::Rmse, &x, &y, &opts).unwrap();
        let find = |a: f64, b: f64| {
            set.solutions
                .iter()
                .find(|s| (s.beta[0] - a).abs() < 1e-8 && (s.beta[1] - b).abs() < 1e-8)
                .unwrap_or_else(|| panic!("missing ({a}, {b})"))
                .metric_value
        };
        let d1 = find(mass, 0.0);
        let d2 = find(0.0, mass);
        assert!((d1 - d2).abs() < 1e-10 && (d1 - set.reference_metric).abs() < 1e-10);
    }

    #[test]
    fn strong_sets() {
        let (x, y) = dup_data();
        let r = reference_fit(&x, &y, 0.05);
        let set = enumerate_strong(&r, Metric::Rmse, &x, &y, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(set.solutions.len(), 2);
        let fitted = x.dot(&r.beta);
        for s in &set.solutions {
            assert!(linf_dist(&x.dot(&s.beta), &fitted) < 1e-8);
            assert!((s.beta.mapv(f64::abs).sum() - r.beta.mapv(f64::abs).sum()).abs() < 1e-8);
            assert!((s.metric_value - set.reference_metric).abs() < 1e-10);
            assert!(s.beta.iter().zip(r.beta.iter()).all(|(a, b)| a * b >= 0.0));
        }

        // three identical columns
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Array1::from_shape_fn(20, |_| rng.gen_range(-1.0..1.0));
        let mut x3 = Array2::zeros((20, 3));
        for j in 0..3 {
            x3.column_mut(j).assign(&c);
        }
        let y3 = &c * 1.5 - c.mean().unwrap() * 1.5;
        let r3 = reference_fit(&x3, &y3, 0.1);
        assert_eq!(r3.support, vec![0, 1, 2]);
        let m = r3.beta.sum();
        let set = enumerate_strong(&r3, Metric::Rmse, &x3, &y3, DEFAULT_DIM_CAP).unwrap();
        let got: Vec<Vec<f64>> = set.solutions.iter().map(|s| s.beta.to_vec()).collect();
        assert_eq!(got.len(), 3);
        let expect = [[0.0, 0.0, m], [0.0, m, 0.0], [m, 0.0, 0.0]];
        for (g, e) in got.iter().zip(expect.iter()) {
            for (a, b) in g.iter().zip(e.iter()) {
                assert!((a - b).abs() < 1e-8, "{got:?}");
            }
        }

        // unique solution
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, y) = random_regression(&mut rng, 40, 5);
        let r = reference_fit(&x, &y, 0.1);
        let set = enumerate_strong(&r, Metric::Rmse, &x, &y, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(set.solutions.len(), 1);
        assert!(linf_dist(&set.solutions[0].beta, &r.beta) < 1e-12);
    }

    #[test]
    fn errors() {
        let (x, y) = dup_data();
        let zero = LassoSolution::new(Array1::zeros(4), 0.0, 1.0, 0.0, Task::Regression);
        assert!(matches!(
            enumerate_relaxed(&zero, Metric::Rmse, &x, &y, &RelaxedOptions::default()),
            Err(Error::EmptySupport)
        ));
        let r = reference_fit(&x, &y, 0.05);
        assert!(matches!(
            enumerate_relaxed(&r, Metric::Deviance, &x, &y, &RelaxedOptions::default()),
            Err(Error::InvalidConfig(_))
        ));
        let capped = RelaxedOptions {
            dim_cap: 0,
            ..Default::default()
        };
        assert!(matches!(
            enumerate_relaxed(&r, Metric::Rmse, &x, &y, &capped),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    /// Independent replay of the enumeration loop on brute-force vertices.
    fn replay(
        r: &LassoSolution,
        metric: Metric,
        x: &Array2<f64>,
        y: &Array1<f64>,
        opts: &RelaxedOptions,
    ) -> usize {
        let x_e = select_columns(x.view(), &r.support);
        let svd = thin_svd(&x_e).unwrap();
        let d_ref = metric_value(metric, &r.beta, r.intercept, x, y).unwrap();
        let mut all: Vec<Array1<f64>> = vec![r.beta_support()];
        let e = r.support.len();
        for i in 1..=opts.d_max.min(e) {
            let poly = relaxed_polytope_at(r, &svd, e - i).unwrap();
            let mut ok = Vec::new();
            let mut bad = false;
            for v in brute_force_vertices(&poly).unwrap() {
                let mut b = Array1::zeros(x.ncols());
                for (k, &j) in r.support.iter().enumerate() {
                    b[j] = v[k];
                }
                if metric_value(metric, &b, r.intercept, x, y).unwrap()
                    <= equivalence_threshold(d_ref, opts.tol)
                {
                    ok.push(v);
                } else {
                    bad = true;
                }
            }
            if bad && opts.strict_break {
                break;
            }
            all.extend(ok);
            if bad {
                break;
            }
        }
        let tol = 1e-9 * norm_inf(r.beta_support().view()).max(1.0);
        let mut uniq: Vec<Array1<f64>> = Vec::new();
        for v in all {
            if !uniq.iter().any(|u| linf_dist(u, &v) <= tol) {
                uniq.push(v);
            }
        }
        uniq.len()
    }

    #[test]
    fn matches_brute_force_replay() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut checked = 0;
        while checked < 15 {
            let (x, y) = random_regression(&mut rng, 25, 6);
            let r = reference_fit(&x, &y, rng.gen_range(0.02..0.3));
            if r.support.is_empty() {
                continue;
            }
            for strict_break in [false, true] {
                let opts = RelaxedOptions {
                    d_max: 6,
                    strict_break,
                    ..Default::default()
                };
                let set = enumerate_relaxed(&r, Metric::Rmse, &x, &y, &opts).unwrap();
                assert_eq!(set.solutions.len(), replay(&r, Metric::Rmse, &x, &y, &opts));
                for s in &set.solutions {
                    assert!(is_equivalent(&s.beta, &r, Metric::Rmse, 0.01, &x, &y));
                    assert!(s.metric_value <= (1.0 + 0.01) * set.reference_metric);
                    assert!(s.metric_value <= set.bound.as_ref().unwrap().value);
                }
                for w in set.solutions.windows(2) {
                    assert_eq!(lex_cmp(&w[0].beta, &w[1].beta), std::cmp::Ordering::Less);
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn classification_solutions_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let x = Array2::from_shape_fn((n, 4), |_| rng.gen_range(-1.0..1.0));
        let y: Array1<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * x[[i, 0]] - x[[i, 1]] + rng.gen_range(-1.0..1.0);
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let r = fit_logistic_reference(&x, &y, 2.0, default_ridge(2.0)).unwrap();
        let set =
            enumerate_relaxed(&r, Metric::Deviance, &x, &y, &RelaxedOptions::default()).unwrap();
        assert!(!set.solutions.is_empty());
        for s in &set.solutions {
            assert!(s.metric_value <= 1.01 * set.reference_metric);
            assert!(s.metric_value <= set.bound.as_ref().unwrap().value);
            assert_eq!(
                s.metric_value,
                deviance(&s.beta, r.intercept, &x, &y).unwrap()
            );
        }
    }

    #[test]
    fn single_level() {
        let (x, y) = dup_data();
        let r = reference_fit(&x, &y, 0.05);
        let e = r.support.len();
        let set = enumerate_level(&r, Metric::Rmse, &x, &y, e - 1, 0.01, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(set.i_star_final, e - 1);
        assert!(set.solutions.iter().any(|s| s.beta == r.beta));
        for s in &set.solutions {
            assert!(s.metric_value <= 1.01 * set.reference_metric);
        }
        assert!(matches!(
            enumerate_level(&r, Metric::Rmse, &x, &y, e + 1, 0.01, DEFAULT_DIM_CAP),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn json_shape() {
        let (x, y) = dup_data();
        let r = reference_fit(&x, &y, 0.05);
        let set = enumerate_relaxed(&r, Metric::Rmse, &x, &y, &RelaxedOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&set).unwrap();
        for key in [
            "metric",
            "tol",
            "i_star_final",
            "reference_metric",
            "solutions",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["metric"], "rmse");
        let s0 = &v["solutions"][0];
        assert!(
            s0["beta"].is_array() && s0["support"].is_array() && s0["metric_value"].is_number()
        );
        let back: EquivalentSolutionSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn convex_combinations_stay_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let (x, y) = random_regression(&mut rng, 30, 6);
            let r = reference_fit(&x, &y, 0.05);
            let set =
                enumerate_relaxed(&r, Metric::Rmse, &x, &y, &RelaxedOptions::default()).unwrap();
            let k = set.solutions.len();
            for _ in 0..50 {
                let a = &set.solutions[rng.gen_range(0..k)].beta;
                let b = &set.solutions[rng.gen_range(0..k)].beta;
                let t = rng.gen_range(0.0..1.0);
                let c = a * t + &(b * (1.0 - t));
                assert!(is_equivalent(&c, &r, Metric::Rmse, 0.01, &x, &y));
            }
        }
    }

    #[test]
    fn each_level_keeps_previous_vertices_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, y) = random_regression(&mut rng, 30, 6);
        let r = reference_fit(&x, &y, 0.05);
        let x_e = select_columns(x.view(), &r.support);
        let svd = thin_svd(&x_e).unwrap();
        let e = r.support.len();
        let mut prev: Vec<Array1<f64>> = vec![r.beta_support()];
        for i_star in (0..e).rev() {
            let poly = relaxed_polytope_at(&r, &svd, i_star).unwrap();
            for v in &prev {
                assert!(poly.violation(v) <= 1e-9);
            }
            prev = crate::polytope::enumerate_vertices(&poly).unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn rmse_tolerance_squares_for_mse(seed in 0u64..1000, t in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = random_regression(&mut rng, 20, 4);
            let b0 = Array1::from_shape_fn(4, |_| rng.gen_range(-1.0..1.0));
            let b1 = Array1::from_shape_fn(4, |_| rng.gen_range(-1.0..1.0));
            let (r0, r1) = (rmse(&b0, &x, &y).unwrap(), rmse(&b1, &x, &y).unwrap());
            if r1 <= (1.0 + t) * r0 {
                let bound = (1.0 + t) * r0;
                prop_assert!(r1 * r1 <= bound * bound);
            }
        }
    }
}
