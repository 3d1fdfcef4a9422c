//! Tabular data loading, predictor standardization, sample splitting and the
//! penalty grid.

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Task};

/// Design matrix, target and column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    column_names: Vec<String>,
    task: Task,
}

impl Dataset {
    /// Validates and wraps the parts of a dataset.
    pub fn new(
        x: Array2<f64>,
        y: Array1<f64>,
        column_names: Vec<String>,
        task: Task,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "X has {n} rows but y has {}",
                y.len()
            )));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "X has {p} columns but {} names were given",
                column_names.len()
            )));
        }
        if n < 2 {
            return Err(Error::TooFewSamples(format!(
                "need at least 2 rows, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::DimensionMismatch("no predictor columns".into()));
        }
        if let Some(((r, c), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Parse {
                row: r + 1,
                col: c + 1,
                msg: "non-finite value".into(),
            });
        }
        match task {
            Task::Classification => {
                if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::NonBinaryTarget(count_distinct(&y)));
                }
                let ones = y.iter().filter(|&&v| v == 1.0).count();
                if ones == 0 || ones == n {
                    return Err(Error::ConstantTarget);
                }
            }
            Task::Regression => {
                if let Some(r) = y.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        row: r + 1,
                        col: 0,
                        msg: "non-finite target".into(),
                    });
                }
            }
        }
        Ok(Self {
            x,
            y,
            column_names,
            task,
        })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` in the given order, without re-validating.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), idx),
            y: self.y.select(Axis(0), idx),
            column_names: self.column_names.clone(),
            task: self.task,
        }
    }
}

fn count_distinct(y: &Array1<f64>) -> usize {
    let mut v: Vec<f64> = y.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Per-column statistics used to standardize a dataset, kept so that
/// coefficients can be mapped back to the original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    /// Means of every original column.
    pub column_means: Vec<f64>,
    /// Sample standard deviations (n-1) of every original column.
    pub column_sds: Vec<f64>,
    pub y_mean: f64,
    /// Original indices of the columns that survived.
    pub retained: Vec<usize>,
    /// Names of zero-variance columns that were dropped.
    pub dropped: Vec<String>,
}

impl StandardizationStats {
    /// Maps standardized coefficients (over the retained columns) back to the
    /// original scale: returns the intercept and a length-p coefficient vector.
    pub fn to_original_scale(&self, beta: &[f64], intercept: f64) -> (f64, Vec<f64>) {
        let mut out = vec![0.0; self.column_means.len()];
        let mut b0 = intercept + self.y_mean;
        for (k, &j) in self.retained.iter().enumerate() {
            let b = beta[k] / self.column_sds[j];
            out[j] = b;
            b0 -= b * self.column_means[j];
        }
        (b0, out)
    }
}

/// Reads a CSV with a header row, splitting off `target_column` as the target.
///
/// Row numbers in parse errors are file line numbers (the header is row 1);
/// column numbers are 1-based.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingColumn(target_column.to_owned()))?;
    let column_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut targets = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => Error::Parse {
                row,
                col: 0,
                msg: "wrong number of fields".into(),
            },
            _ => csv_error(path, e),
        })?;
        for (j, cell) in rec.iter().enumerate() {
            if j == target_idx {
                targets.push(cell.to_owned());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                col: j + 1,
                msg: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    col: j + 1,
                    msg: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
    }
    let n = targets.len();
    let p = column_names.len();
    let y = match task {
        Task::Regression => targets
            .iter()
            .enumerate()
            .map(|(i, t)| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row: i + 2,
                    col: target_idx + 1,
                    msg: format!("`{t}` is not a finite number"),
                }),
            })
            .collect::<Result<Vec<_>>>()?,
        Task::Classification => binary_labels(&targets)?,
    };
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::ConstantTarget);
    }
    let x = Array2::from_shape_vec((n, p), values)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    Dataset::new(x, Array1::from(y), column_names, task)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            row: 0,
            col: 0,
            msg: format!("{other:?}"),
        },
    }
}

/// Numeric 0/1 labels are kept as is; any other pair of labels is mapped by
/// first occurrence (first seen -> 0).
fn binary_labels(targets: &[String]) -> Result<Vec<f64>> {
    let numeric: Option<Vec<f64>> = targets
        .iter()
        .map(|t| t.parse::<f64>().ok().filter(|v| *v == 0.0 || *v == 1.0))
        .collect();
    if let Some(v) = numeric {
        return Ok(v);
    }
    let mut codes: HashMap<&str, f64> = HashMap::new();
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let next = codes.len() as f64;
        let code = *codes.entry(t.as_str()).or_insert(next);
        out.push(code);
    }
    match codes.len() {
        1 => Err(Error::ConstantTarget),
        2 => Ok(out),
        k => Err(Error::NonBinaryTarget(k)),
    }
}

/// Centers and scales each predictor to mean 0 and sample sd 1, centers a
/// regression target, and drops zero-variance columns.
pub fn standardize(d: &Dataset) -> Result<(Dataset, StandardizationStats)> {
    let (n, p) = d.x.dim();
    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..p {
        let col = d.x.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        means.push(mean);
        sds.push(sd);
        // relative test so that rounding noise in a constant column does not count
        if sd > 1e-12 * mean.abs().max(f64::MIN_POSITIVE) && sd > 0.0 {
            retained.push(j);
        } else {
            dropped.push(d.column_names[j].clone());
        }
    }
    if retained.is_empty() {
        return Err(Error::AllColumnsConstant);
    }
    let mut x = Array2::zeros((n, retained.len()));
    for (k, &j) in retained.iter().enumerate() {
        let (m, s) = (means[j], sds[j]);
        x.column_mut(k).assign(&d.x.column(j).mapv(|v| (v - m) / s));
    }
    let y_mean = match d.task {
        Task::Regression => d.y.sum() / n as f64,
        Task::Classification => 0.0,
    };
    let y = d.y.mapv(|v| v - y_mean);
    let names = retained
        .iter()
        .map(|&j| d.column_names[j].clone())
        .collect();
    let stats = StandardizationStats {
        column_means: means,
        column_sds: sds,
        y_mean,
        retained,
        dropped,
    };
    Ok((
        Dataset {
            x,
            y,
            column_names: names,
            task: d.task,
        },
        stats,
    ))
}

/// Splits rows into two parts, the first holding about `fraction` of the
/// samples. Classification splits are stratified by class.
pub fn stratified_split(d: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction {fraction} not in (0,1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for mut group in class_groups(d) {
        if group.len() < 2 {
            return Err(Error::TooFewSamples(format!(
                "a stratum has {} sample(s), need at least 2",
                group.len()
            )));
        }
        group.shuffle(&mut rng);
        let k = ((fraction * group.len() as f64).round() as usize).clamp(1, group.len() - 1);
        first.extend_from_slice(&group[..k]);
        second.extend_from_slice(&group[k..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((d.subset(&first), d.subset(&second)))
}

/// Row indices per stratum: one group per class for classification, a single
/// group for regression.
fn class_groups(d: &Dataset) -> Vec<Vec<usize>> {
    match d.task {
        Task::Regression => vec![(0..d.n_samples()).collect()],
        Task::Classification => {
            let (mut zeros, mut ones) = (Vec::new(), Vec::new());
            for (i, &v) in d.y.iter().enumerate() {
                if v == 1.0 {
                    ones.push(i)
                } else {
                    zeros.push(i)
                }
            }
            vec![zeros, ones]
        }
    }
}

/// Assigns each row to one of `folds` folds, stratified by class for
/// classification. Deterministic given the seed.
pub fn fold_assignments(d: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; d.n_samples()];
    let mut offset = 0;
    for mut group in class_groups(d) {
        if group.len() < folds {
            return Err(Error::FoldTooSmall(format!(
                "a stratum has {} samples but {folds} folds were requested",
                group.len()
            )));
        }
        group.shuffle(&mut rng);
        for (k, &i) in group.iter().enumerate() {
            assignment[i] = (k + offset) % folds;
        }
        offset += group.len();
    }
    Ok(assignment)
}

/// Log-spaced penalty values `10^(min + k*step)`, ascending.
pub fn lambda_grid(min_exponent: f64, max_exponent: f64, step_exponent: f64) -> Result<Vec<f64>> {
    if !(min_exponent.is_finite() && max_exponent.is_finite() && step_exponent.is_finite()) {
        return Err(Error::EmptyGrid("non-finite exponent".into()));
    }
    if min_exponent > max_exponent || step_exponent <= 0.0 {
        return Err(Error::EmptyGrid(format!(
            "min {min_exponent}, max {max_exponent}, step {step_exponent}"
        )));
    }
    let count = ((max_exponent - min_exponent) / step_exponent + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let e = min_exponent + k as f64 * step_exponent;
            // remove accumulated drift so that integer exponents land exactly
            let e = (e * 1e9).round() / 1e9;
            10f64.powf(e)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_csv() {
        let f = write_csv("a,b,t\n1,2,0\n3,4,1\n5,6,0\n");
        let d = load_csv(f.path(), "t", Task::Classification).unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_samples(), 3);
        assert_eq!(d.y(), &array![0.0, 1.0, 0.0]);
        assert_eq!(d.column_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.x(), &array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
    }

    #[test]
    fn target_in_middle_keeps_column_order() {
        let f = write_csv("a,t,b\n1,0.5,2\n3,1.5,4\n");
        let d = load_csv(f.path(), "t", Task::Regression).unwrap();
        assert_eq!(d.x(), &array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(d.y(), &array![0.5, 1.5]);
    }

    #[test]
    fn missing_target_column() {
        let f = write_csv("a,b\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(f.path(), "t", Task::Regression),
            Err(Error::MissingColumn(c)) if c == "t"
        ));
    }

    #[test]
    fn three_labels_are_rejected() {
        let f = write_csv("a,t\n1,x\n2,y\n3,z\n");
        assert!(matches!(
            load_csv(f.path(), "t", Task::Classification),
            Err(Error::NonBinaryTarget(3))
        ));
    }

    #[test]
    fn string_labels_map_by_first_occurrence() {
        let f = write_csv("a,t\n1,yes\n2,no\n3,yes\n");
        let d = load_csv(f.path(), "t", Task::Classification).unwrap();
        assert_eq!(d.y(), &array![0.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_target_is_rejected() {
        let f = write_csv("a,t\n1,1\n2,1\n3,1\n");
        assert!(matches!(
            load_csv(f.path(), "t", Task::Classification),
            Err(Error::ConstantTarget)
        ));
    }

    #[test]
    fn parse_error_reports_row_and_column() {
        let f = write_csv("a,b,t\n1,2,0\n3,oops,1\n");
        match load_csv(f.path(), "t", Task::Classification) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn standardizes_columns_and_centers_target() {
        let d = Dataset::new(
            array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]],
            array![2.0, 4.0, 6.0],
            vec!["a".into(), "c".into()],
            Task::Regression,
        )
        .unwrap();
        let (s, stats) = standardize(&d).unwrap();
        assert_eq!(s.n_features(), 1);
        assert_eq!(stats.dropped, vec!["c".to_string()]);
        assert_eq!(stats.column_means[0], 2.0);
        assert_eq!(stats.column_sds[0], 1.0);
        assert_eq!(s.x().column(0).to_vec(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(s.y(), &array![-2.0, 0.0, 2.0]);
        assert_eq!(stats.y_mean, 4.0);
    }

    #[test]
    fn all_constant_columns_fail() {
        let d = Dataset::new(
            array![[5.0], [5.0], [5.0]],
            array![0.0, 1.0, 0.0],
            vec!["c".into()],
            Task::Classification,
        )
        .unwrap();
        assert!(matches!(standardize(&d), Err(Error::AllColumnsConstant)));
    }

    #[test]
    fn back_transform_reproduces_predictions() {
        let d = Dataset::new(
            array![[1.0, 10.0], [2.0, 30.0], [4.0, 20.0], [7.0, 0.0]],
            array![1.0, 2.0, 0.5, 3.0],
            vec!["a".into(), "b".into()],
            Task::Regression,
        )
        .unwrap();
        let (s, stats) = standardize(&d).unwrap();
        let beta = [0.3, -0.2];
        let (b0, orig) = stats.to_original_scale(&beta, 0.0);
        for i in 0..4 {
            let std_pred = s.x()[[i, 0]] * beta[0] + s.x()[[i, 1]] * beta[1] + stats.y_mean;
            let orig_pred = b0 + d.x()[[i, 0]] * orig[0] + d.x()[[i, 1]] * orig[1];
            assert!((std_pred - orig_pred).abs() < 1e-12);
        }
    }

    fn classification_10() -> Dataset {
        let y = array![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let x = Array2::from_shape_fn((10, 1), |(i, _)| i as f64);
        Dataset::new(x, y, vec!["a".into()], Task::Classification).unwrap()
    }

    #[test]
    fn stratified_halves() {
        let d = classification_10();
        let (a, b) = stratified_split(&d, 0.5, 7).unwrap();
        for part in [&a, &b] {
            let ones = part.y().iter().filter(|&&v| v == 1.0).count();
            assert_eq!((part.n_samples() - ones, ones), (3, 2));
        }
        let (a2, b2) = stratified_split(&d, 0.5, 7).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
    }

    #[test]
    fn split_partitions_rows() {
        let d = classification_10();
        let (a, b) = stratified_split(&d, 0.3, 11).unwrap();
        let mut ids: Vec<i64> = a
            .x()
            .column(0)
            .iter()
            .chain(b.x().column(0).iter())
            .map(|&v| v as i64)
            .collect();
        ids.sort();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_class_cannot_be_split() {
        let d = Dataset::new(
            Array2::from_shape_fn((4, 1), |(i, _)| i as f64),
            array![0.0, 0.0, 0.0, 1.0],
            vec!["a".into()],
            Task::Classification,
        )
        .unwrap();
        assert!(matches!(
            stratified_split(&d, 0.5, 1),
            Err(Error::TooFewSamples(_))
        ));
    }

    #[test]
    fn grid_endpoints() {
        let g = lambda_grid(-3.0, 3.0, 0.1).unwrap();
        assert_eq!(g.len(), 61);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[60] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(lambda_grid(0.0, 0.0, 0.1).unwrap(), vec![1.0]);
        let g = lambda_grid(0.0, 1.0, 0.5).unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(g[2], 10.0);
        assert!(lambda_grid(1.0, 0.0, 0.1).is_err());
        assert!(lambda_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let d = classification_10();
        let f = fold_assignments(&d, 2, 3).unwrap();
        assert_eq!(f, fold_assignments(&d, 2, 3).unwrap());
        for k in 0..2 {
            let ones = (0..10).filter(|&i| f[i] == k && d.y()[i] == 1.0).count();
            assert_eq!(ones, 2);
        }
        assert!(matches!(
            fold_assignments(&d, 5, 3),
            Err(Error::FoldTooSmall(_))
        ));
    }
}
