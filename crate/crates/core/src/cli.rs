//! Command-line front end: `fit`, `enumerate`, `categorize` and `report`.
//!
//! Exit codes: 0 on success, 2 for invalid input or configuration, 3 for
//! numerical failures (no convergence, unbounded or oversized polytopes).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::categorize::{categorize_variables, write_bounds_csv, Level, VariableBound};
use crate::dataset::{lambda_grid, load_csv, standardize, StandardizationStats};
use crate::equivalence::{
    enumerate_level, enumerate_relaxed, enumerate_strong, EquivalentSolutionSet, Metric,
    RelaxedOptions,
};
use crate::lasso::{
    default_ridge, fit_logistic_reference, fit_reference, tune_lambda_cv, CvResult, LassoSolution,
};
use crate::linalg::select_columns;
use crate::polytope::DEFAULT_DIM_CAP;
use crate::report::{signature_report, SignatureReport};
use crate::spectral::thin_svd;
use crate::{Error, Result, Task};

#[derive(Debug, Parser)]
#[command(
    name = "lasso-equiv",
    version,
    about = "Enumerate performance-equivalent Lasso solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the reference solution and write the model JSON.
    Fit(FitArgs),
    /// Enumerate equivalent solutions of a fitted model.
    Enumerate(EnumerateArgs),
    /// Coefficient ranges and indispensable/replaceable labels as CSV.
    Categorize(CategorizeArgs),
    /// Signature statistics over an enumerated solution set.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TaskArg {
    Regression,
    Classification,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Regression => Task::Regression,
            TaskArg::Classification => Task::Classification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MetricArg {
    Auto,
    Rmse,
    Deviance,
}

/// `auto` or a fixed nonnegative penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LambdaSpec {
    Auto,
    Fixed(f64),
}

impl FromStr for LambdaSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaSpec::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(LambdaSpec::Fixed(v)),
            _ => Err(format!(
                "expected `auto` or a nonnegative number, got `{s}`"
            )),
        }
    }
}

/// `auto` (iterative relaxation), `strong`, or a fixed `i*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum IStarSpec {
    Auto,
    Strong,
    Fixed(usize),
}

impl FromStr for IStarSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(IStarSpec::Auto),
            "strong" => Ok(IStarSpec::Strong),
            other => other
                .parse()
                .map(IStarSpec::Fixed)
                .map_err(|_| format!("expected `auto`, `strong` or an integer, got `{s}`")),
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "regression")]
    task: TaskArg,
    #[arg(long, default_value = "auto")]
    lambda: LambdaSpec,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Data options that default to the ones recorded in the model.
#[derive(Debug, Args)]
struct DataOverride {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    source: DataOverride,
    #[arg(long, value_enum, default_value = "auto")]
    metric: MetricArg,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long, default_value_t = 12)]
    dmax: usize,
    #[arg(long, default_value = "auto")]
    istar: IStarSpec,
    #[arg(long)]
    strict_break: bool,
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    dim_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CategorizeArgs {
    #[command(flatten)]
    source: DataOverride,
    #[arg(long, default_value = "strong")]
    istar: IStarSpec,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    solutions: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FitConfig {
    data: PathBuf,
    target: String,
    task: Task,
    lambda: LambdaSpec,
    folds: usize,
    seed: u64,
    lambda_grid: Option<[f64; 3]>,
    ridge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct OriginalScale {
    intercept: f64,
    coefficients: Vec<f64>,
}

/// Everything `fit` writes; later commands rebuild the standardized data
/// from `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    config: FitConfig,
    lambda: f64,
    cv: Option<CvResult>,
    solution: LassoSolution,
    standardization: StandardizationStats,
    original_scale: OriginalScale,
}

#[derive(Debug, Serialize)]
struct EnumerateConfig<'a> {
    model: &'a Path,
    data: &'a Path,
    target: &'a str,
    task: Task,
    metric: Metric,
    tol: f64,
    dmax: usize,
    istar: IStarSpec,
    strict_break: bool,
    dim_cap: usize,
}

#[derive(Debug, Serialize)]
struct EnumerateOutput<'a> {
    config: EnumerateConfig<'a>,
    #[serde(flatten)]
    set: &'a EquivalentSolutionSet,
}

#[derive(Debug, Serialize)]
struct ReportOutput<'a> {
    config: ReportConfig<'a>,
    #[serde(flatten)]
    report: &'a SignatureReport,
}

#[derive(Debug, Serialize)]
struct ReportConfig<'a> {
    solutions: &'a Path,
    metric: Metric,
    tol: f64,
    i_star_final: usize,
}

const GRID: [f64; 3] = [-3.0, 3.0, 0.1];

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Enumerate(a) => cmd_enumerate(&a),
        Command::Categorize(a) => cmd_categorize(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    if a.folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "--folds must be >= 2, got {}",
            a.folds
        )));
    }
    let task = Task::from(a.task);
    let raw = load_csv(&a.data, &a.target, task)?;
    let (data, stats) = standardize(&raw)?;
    let (lambda, cv) = match a.lambda {
        LambdaSpec::Fixed(l) => (l, None),
        LambdaSpec::Auto => {
            let grid = lambda_grid(GRID[0], GRID[1], GRID[2])?;
            let cv = tune_lambda_cv(&data, &grid, a.folds, a.seed)?;
            (cv.lambda_star, Some(cv))
        }
    };
    let ridge = default_ridge(lambda);
    let solution = match task {
        Task::Regression => fit_reference(data.x(), data.y(), lambda, ridge)?,
        Task::Classification => fit_logistic_reference(data.x(), data.y(), lambda, ridge)?,
    }
    .with_column_names(data.column_names().to_vec());
    let (intercept, coefficients) =
        stats.to_original_scale(solution.beta.as_slice().unwrap_or(&[]), solution.intercept);
    let model = ModelFile {
        config: FitConfig {
            data: a.data.clone(),
            target: a.target.clone(),
            task,
            lambda: a.lambda,
            folds: a.folds,
            seed: a.seed,
            lambda_grid: matches!(a.lambda, LambdaSpec::Auto).then_some(GRID),
            ridge,
        },
        lambda,
        cv,
        standardization: stats,
        original_scale: OriginalScale {
            intercept,
            coefficients,
        },
        solution,
    };
    write_json(&a.out, &model)?;
    println!(
        "lambda* = {}  |E| = {}  objective = {}",
        model.lambda,
        model.solution.support.len(),
        model.solution.objective
    );
    Ok(())
}

/// Loaded model plus the standardized data it was fitted on.
struct Loaded {
    model: ModelFile,
    data: PathBuf,
    target: String,
    task: Task,
    x: Array2<f64>,
    y: Array1<f64>,
}

fn load_model(src: &DataOverride) -> Result<Loaded> {
    let text = fs::read_to_string(&src.model).map_err(|e| Error::io(&src.model, e))?;
    let model: ModelFile = serde_json::from_str(&text)?;
    let data = src
        .data
        .clone()
        .unwrap_or_else(|| model.config.data.clone());
    let target = src
        .target
        .clone()
        .unwrap_or_else(|| model.config.target.clone());
    let task = src.task.map(Task::from).unwrap_or(model.config.task);
    if task != model.solution.task {
        return Err(Error::InvalidConfig(format!(
            "task {task} does not match the model's task {}",
            model.solution.task
        )));
    }
    let raw = load_csv(&data, &target, task)?;
    let (std_data, _) = standardize(&raw)?;
    if std_data.n_features() != model.solution.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} usable predictors, model has {}",
            std_data.n_features(),
            model.solution.beta.len()
        )));
    }
    Ok(Loaded {
        model,
        data,
        target,
        task,
        x: std_data.x().clone(),
        y: std_data.y().clone(),
    })
}

fn resolve_metric(m: MetricArg, task: Task) -> Result<Metric> {
    match (m, task) {
        (MetricArg::Auto, t) => Ok(Metric::for_task(t)),
        (MetricArg::Rmse, _) => Ok(Metric::Rmse),
        (MetricArg::Deviance, Task::Classification) => Ok(Metric::Deviance),
        (MetricArg::Deviance, Task::Regression) => Err(Error::InvalidConfig(
            "--metric deviance requires --task classification".into(),
        )),
    }
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<()> {
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "--tol must be >= 0, got {}",
            a.tol
        )));
    }
    if a.dmax == 0 {
        return Err(Error::InvalidConfig("--dmax must be >= 1".into()));
    }
    let ld = load_model(&a.source)?;
    let metric = resolve_metric(a.metric, ld.task)?;
    let reference = &ld.model.solution;
    let set = match a.istar {
        IStarSpec::Auto => {
            let opts = RelaxedOptions {
                tol: a.tol,
                d_max: a.dmax,
                strict_break: a.strict_break,
                dim_cap: a.dim_cap,
            };
            enumerate_relaxed(reference, metric, &ld.x, &ld.y, &opts)?
        }
        IStarSpec::Strong => enumerate_strong(reference, metric, &ld.x, &ld.y, a.dim_cap)?,
        IStarSpec::Fixed(k) => {
            enumerate_level(reference, metric, &ld.x, &ld.y, k, a.tol, a.dim_cap)?
        }
    };
    let out = EnumerateOutput {
        config: EnumerateConfig {
            model: &a.source.model,
            data: &ld.data,
            target: &ld.target,
            task: ld.task,
            metric,
            tol: a.tol,
            dmax: a.dmax,
            istar: a.istar,
            strict_break: a.strict_break,
            dim_cap: a.dim_cap,
        },
        set: &set,
    };
    write_json(&a.out, &out)?;

    let (lo, hi) = set
        .solutions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.metric_value), hi.max(s.metric_value))
        });
    println!("solutions: {}", set.solutions.len());
    println!("i*_final: {}", set.i_star_final);
    println!(
        "{metric} reference: {}  range: [{lo}, {hi}]",
        set.reference_metric
    );
    if let Some(b) = &set.bound {
        println!("{metric} bound at i*_final: {} (l = {})", b.value, b.l);
    }
    Ok(())
}

fn cmd_categorize(a: &CategorizeArgs) -> Result<()> {
    let ld = load_model(&a.source)?;
    let reference = &ld.model.solution;
    if reference.support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let spectral = thin_svd(&select_columns(ld.x.view(), &reference.support))?;
    let level = match a.istar {
        IStarSpec::Strong => Level::Strong,
        IStarSpec::Fixed(k) => Level::Relaxed(k),
        IStarSpec::Auto => {
            return Err(Error::InvalidConfig(
                "categorize needs --istar strong or an integer".into(),
            ))
        }
    };
    let bounds: Vec<VariableBound> = categorize_variables(reference, &spectral, level)?;
    let mut buf = Vec::new();
    write_bounds_csv(&mut buf, &bounds, &reference.column_names)?;
    write_atomic(&a.out, &buf)?;
    let replaceable = bounds
        .iter()
        .filter(|b| b.category == crate::categorize::Category::Dispensable)
        .count();
    println!(
        "variables: {}  indispensable: {}  replaceable: {replaceable}",
        bounds.len(),
        bounds.len() - replaceable
    );
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&a.solutions).map_err(|e| Error::io(&a.solutions, e))?;
    let set: EquivalentSolutionSet = serde_json::from_str(&text)?;
    if set.solutions.is_empty() {
        return Err(Error::InvalidConfig("solution set is empty".into()));
    }
    let report = signature_report(&set, None);
    let out = ReportOutput {
        config: ReportConfig {
            solutions: &a.solutions,
            metric: set.metric,
            tol: set.tol,
            i_star_final: set.i_star_final,
        },
        report: &report,
    };
    write_json(&a.out, &out)?;
    println!(
        "signatures: {}  groups: {}",
        report.n_signatures,
        report.groups.len()
    );
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    write_atomic(path, &buf)
}

/// Writes to a sibling temporary file and renames it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| {
        Error::InvalidConfig(format!("output path `{}` has no file name", path.display()))
    })?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
