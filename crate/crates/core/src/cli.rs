//! The `vda` command-line tool.
//!
//! Settings come from three layers: built-in defaults, an optional TOML file
//! given with `--config`, and command-line flags, each overriding the last.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::datagen::{self, Recipe, SimSpec};
use crate::dataset::{self, LabeledDataset};
use crate::error::{Result, VdaError};
use crate::kernel::{self, KernelSpec};
use crate::model::{ModelFile, Predictor};
use crate::model_selection::{self, CvMode, CvPlan, CvReport, Standardizer, TestSplit};
use crate::solver::{Annealing, Problem, SolverConfig, SolverKind};
use crate::sparsity;

#[derive(Debug, Parser)]
#[command(name = "vda", version, about = "Sparse vertex discriminant analysis")]
pub struct Cli {
    /// Worker threads for cross validation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model of a given size and save it as JSON.
    Fit(FitArgs),
    /// Fit a warm-started path of model sizes and write a per-size table.
    Path(PathArgs),
    /// Repeated cross validation over a grid of model sizes.
    Cv(CvArgs),
    /// Write a simulated dataset as CSV.
    Simulate(SimulateArgs),
    /// Predict labels for a CSV of features with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum KernelArg {
    Rbf,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverArg {
    Svd,
    SteepestDescent,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelArgs {
    /// TOML file with default settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dead-zone radius (default: largest non-overlapping radius).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Use kernel VDA; the model size then counts support points.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Kernel scale: `auto` or a positive number.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long = "rho-mult")]
    pub rho_mult: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    #[arg(long = "max-outer")]
    pub max_outer: Option<usize>,
    #[arg(long = "max-inner")]
    pub max_inner: Option<usize>,
    /// Ridge coefficient of the initial dense fit.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Fit without an intercept.
    #[arg(long = "no-intercept")]
    pub no_intercept: bool,
    /// Ridge refit on the selected support after projection.
    #[arg(long)]
    pub debias: bool,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the label column.
    #[arg(long, default_value = "class")]
    pub label: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model size: active features, or support points with `--kernel`.
    #[arg(long)]
    pub k: usize,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated decreasing model sizes (default: every size for up to
    /// 100 features, else 50 log-spaced sizes).
    #[arg(long)]
    pub grid: Option<String>,
    /// True coefficients (CSV, one row per feature) for recovery metrics.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Fraction of samples held out for testing.
    #[arg(long = "test-fraction", conflicts_with = "test_size")]
    pub test_fraction: Option<f64>,
    /// Number of samples held out for testing.
    #[arg(long = "test-size")]
    pub test_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix: writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum RecipeArg {
    Clouds,
    Circles,
    Waveform,
    Tenclouds,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub recipe: RecipeArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cloud spread (clouds: 0.25, tenclouds: 1).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of classes (circles: 3, tenclouds: 10).
    #[arg(long)]
    pub classes: Option<usize>,
    /// Probability of keeping the ring label (circles).
    #[arg(long = "p-bayes", default_value_t = 0.8)]
    pub p_bayes: f64,
    /// Number of features (tenclouds).
    #[arg(long, default_value_t = 50)]
    pub features: usize,
    /// Class separation (tenclouds).
    #[arg(long, default_value_t = 3.0)]
    pub d: f64,
    /// Name of the label column to write.
    #[arg(long, default_value = "class")]
    pub label: String,
    /// Also write the true coefficients (tenclouds only).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV; a label column, if named with `--label`, is ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings that may appear in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub solver: FileSolver,
    #[serde(default)]
    pub cv: FileCv,
    pub kernel: Option<FileKernel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSolver {
    pub epsilon: Option<f64>,
    pub rho0: Option<f64>,
    pub rho_mult: Option<f64>,
    pub kind: Option<SolverArg>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub lambda: Option<f64>,
    pub delta_g: Option<f64>,
    pub delta_d: Option<f64>,
    pub delta_q: Option<f64>,
    pub delta_f: Option<f64>,
    pub nesterov_threshold: Option<usize>,
    pub intercept: Option<bool>,
    pub debias: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCv {
    pub grid: Option<Vec<usize>>,
    pub folds: Option<usize>,
    pub replicates: Option<usize>,
    pub test_fraction: Option<f64>,
    pub test_size: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileKernel {
    /// `"auto"` or a number.
    pub gamma: Option<toml::Value>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| VdaError::config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| VdaError::config(format!("config {}: {e}", path.display())))
}

/// Kernel settings after merging file and flags.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Gamma {
    Auto,
    Fixed(f64),
}

fn parse_gamma(text: &str) -> Result<Gamma> {
    if text == "auto" {
        return Ok(Gamma::Auto);
    }
    match text.parse::<f64>() {
        Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Fixed(g)),
        _ => Err(VdaError::config(format!("--gamma must be `auto` or a positive number, got `{text}`"))),
    }
}

#[derive(Debug)]
struct Resolved {
    solver: SolverConfig,
    kernel: Option<Gamma>,
    file: FileConfig,
}

fn resolve(args: &ModelArgs) -> Result<Resolved> {
    let file = load_config(args.config.as_deref())?;
    let fs = &file.solver;
    let defaults = SolverConfig::default();
    let kind = args.solver.or(fs.kind).map(|k| match k {
        SolverArg::Svd => SolverKind::SvdDirect,
        SolverArg::SteepestDescent => SolverKind::SteepestDescent,
    });
    let solver = SolverConfig {
        epsilon: args.epsilon.or(fs.epsilon),
        delta_g: fs.delta_g,
        delta_d: fs.delta_d.unwrap_or(defaults.delta_d),
        delta_q: fs.delta_q.unwrap_or(defaults.delta_q),
        delta_f: fs.delta_f,
        max_outer: args.max_outer.or(fs.max_outer).unwrap_or(defaults.max_outer),
        max_inner: args.max_inner.or(fs.max_inner).unwrap_or(defaults.max_inner),
        nesterov_threshold: fs.nesterov_threshold.unwrap_or(defaults.nesterov_threshold),
        annealing: Annealing {
            rho0: args.rho0.or(fs.rho0).unwrap_or(defaults.annealing.rho0),
            multiplier: args.rho_mult.or(fs.rho_mult).unwrap_or(defaults.annealing.multiplier),
        },
        kind: kind.unwrap_or(defaults.kind),
        lambda_init: args.lambda.or(fs.lambda).unwrap_or(defaults.lambda_init),
        intercept: if args.no_intercept { false } else { fs.intercept.unwrap_or(true) },
        debias: args.debias || fs.debias.unwrap_or(false),
    };
    solver.validate()?;

    let file_gamma = match file.kernel.as_ref().and_then(|k| k.gamma.as_ref()) {
        None => None,
        Some(toml::Value::String(s)) => Some(parse_gamma(s)?),
        Some(toml::Value::Float(g)) => Some(parse_gamma(&g.to_string())?),
        Some(toml::Value::Integer(g)) => Some(parse_gamma(&g.to_string())?),
        Some(other) => return Err(VdaError::config(format!("kernel.gamma: unexpected value {other}"))),
    };
    let flag_gamma = args.gamma.as_deref().map(parse_gamma).transpose()?;
    let kernel = if args.kernel.is_some() || file.kernel.is_some() {
        Some(flag_gamma.or(file_gamma).unwrap_or(Gamma::Auto))
    } else {
        if flag_gamma.is_some() {
            return Err(VdaError::config("--gamma requires --kernel rbf"));
        }
        None
    };
    Ok(Resolved { solver, kernel, file })
}

fn parse_grid(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| VdaError::config(format!("bad grid entry `{}`", t.trim())))
        })
        .collect()
}

fn load_data(args: &DataArgs) -> Result<LabeledDataset> {
    let ingested = dataset::ingest_csv(&args.input, &args.label)?;
    if ingested.dropped > 0 {
        eprintln!("dropped {} rows with missing values", ingested.dropped);
    }
    Ok(ingested.dataset)
}

fn warn_binary(data: &LabeledDataset, config: &SolverConfig) {
    if data.n_classes() == 2 && config.epsilon.is_none() {
        eprintln!(
            "warning: with two classes the default epsilon = 1 makes the zero model optimal; \
             pass a smaller --epsilon (for example 0.5)"
        );
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn kernel_spec(gamma: Gamma, x: &DMatrix<f64>, labels: &[usize]) -> Result<KernelSpec> {
    match gamma {
        Gamma::Fixed(g) => KernelSpec::rbf(g),
        Gamma::Auto => KernelSpec::rbf(kernel::gamma_heuristic(x, labels)?),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<bool> {
    let settings = resolve(&args.model)?;
    let data = load_data(&args.data)?;
    warn_binary(&data, &settings.solver);
    let std = Standardizer::fit(data.x())?;
    let x = std.apply(data.x())?;
    let (predictor, converged) = match settings.kernel {
        None => {
            if args.k > data.n_features() {
                return Err(VdaError::config(format!(
                    "--k {} exceeds the {} features",
                    args.k,
                    data.n_features()
                )));
            }
            let problem = Problem::new(&x, &data.response(), &settings.solver)?;
            let ridge = problem.ridge_init(None)?;
            let fit = if args.k == data.n_features() {
                ridge
            } else {
                problem.fit(args.k, &ridge.coefficients)?
            };
            (Predictor::Linear { coefficients: fit.coefficients }, fit.converged)
        }
        Some(gamma) => {
            let spec = kernel_spec(gamma, &x, data.labels())?;
            let out = kernel::fit_kernel(&x, data.labels(), data.codec(), args.k, &settings.solver, spec)?;
            (Predictor::Kernel { model: out.model }, out.fit.converged)
        }
    };
    let file = ModelFile {
        version: env!("CARGO_PKG_VERSION").to_string(),
        class_names: data.codec().class_names().to_vec(),
        feature_names: data.feature_names().to_vec(),
        standardizer: std,
        epsilon: match settings.solver.epsilon {
            Some(e) => e,
            None => crate::geometry::max_epsilon(data.n_classes())?,
        },
        k: args.k,
        converged,
        solver: settings.solver,
        predictor,
    };
    let predictions = file.predict(data.x())?;
    let err = model_selection::classification_error(&predictions, data.labels())?;
    file.save(&args.out)?;
    eprintln!("training error {err}");
    if !converged {
        eprintln!("fit did not converge within the iteration caps; the model was written anyway");
    }
    Ok(converged)
}

fn read_truth(path: &Path) -> Result<DMatrix<f64>> {
    let (m, _) = dataset::read_features(File::open(path)?, None)?;
    Ok(m)
}

fn cmd_path(args: &PathArgs) -> Result<bool> {
    let settings = resolve(&args.model)?;
    let data = load_data(&args.data)?;
    warn_binary(&data, &settings.solver);
    let std = Standardizer::fit(data.x())?;
    let x = std.apply(data.x())?;
    let y = data.response();
    let kernel_mode = settings.kernel.is_some();
    let max = if kernel_mode { data.n_samples() } else { data.n_features() };
    let grid = match args.grid.as_deref() {
        Some(g) => parse_grid(g)?,
        None => settings.file.cv.grid.clone().unwrap_or_else(|| model_selection::default_grid(max)),
    };
    let truth = args.truth.as_deref().map(read_truth).transpose()?;
    if kernel_mode && truth.is_some() {
        return Err(VdaError::config("--truth applies to linear paths only"));
    }
    let design = match settings.kernel {
        Some(gamma) => kernel::kernel_matrix(&x, &x, &kernel_spec(gamma, &x, data.labels())?)?,
        None => x.clone(),
    };
    let path = Problem::new(&design, &y, &settings.solver)?.path(&grid)?;

    let mut w = csv::Writer::from_writer(create(&args.out)?);
    let mut header = vec!["k", "active", "train_error", "converged", "outer_iters", "inner_iters", "final_distance"];
    if truth.is_some() {
        header.extend(["relative_mse", "true_positives", "false_positives", "true_negatives", "false_negatives"]);
    }
    w.write_record(&header)?;
    let mut all_converged = true;
    for entry in &path.entries {
        let fit = &entry.fit;
        all_converged &= fit.converged;
        let predicted = data.codec().vertices().classify_rows(&fit.coefficients.predict(&design)?)?;
        let err = model_selection::classification_error(&predicted, data.labels())?;
        let mut row = vec![
            entry.k.to_string(),
            sparsity::support(fit.coefficients.slopes(), 0.0).len().to_string(),
            err.to_string(),
            fit.converged.to_string(),
            fit.outer_iters.to_string(),
            fit.inner_iters_total.to_string(),
            fit.final_distance.to_string(),
        ];
        if let Some(b0) = &truth {
            let raw = std.unstandardize(&fit.coefficients)?;
            let m = model_selection::recovery_metrics(&raw, b0, &data)?;
            row.extend([
                m.relative_mse.to_string(),
                m.true_positives.to_string(),
                m.false_positives.to_string(),
                m.true_negatives.to_string(),
                m.false_negatives.to_string(),
            ]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    if !all_converged {
        eprintln!("note: some path entries stopped at the iteration caps");
    }
    Ok(true)
}

#[derive(Serialize)]
struct CvSummaryFile<'a> {
    n_samples: usize,
    n_features: usize,
    classes: &'a [String],
    plan: &'a CvPlan,
    solver: &'a SolverConfig,
    report: CvSummaryBody<'a>,
}

#[derive(Serialize)]
struct CvSummaryBody<'a> {
    mode: &'a CvMode,
    max_size: usize,
    n_test: usize,
    n_cv: usize,
    unconverged_fits: usize,
    summary: &'a model_selection::CvSummary,
    replicates: &'a [model_selection::ReplicateResult],
    k_opt_counts: Vec<(usize, usize)>,
}

fn write_cv(out: &Path, data: &LabeledDataset, plan: &CvPlan, config: &SolverConfig, report: &CvReport) -> Result<()> {
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["replicate", "fold", "k", "train_error", "validation_error", "test_error", "converged"])?;
    for r in &report.records {
        w.write_record([
            r.replicate.to_string(),
            r.fold.to_string(),
            r.k.to_string(),
            r.train_error.to_string(),
            r.validation_error.to_string(),
            r.test_error.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;

    let mut counts = std::collections::BTreeMap::new();
    for r in &report.replicates {
        *counts.entry(r.k_opt).or_insert(0) += 1;
    }
    let body = CvSummaryFile {
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        classes: data.codec().class_names(),
        plan,
        solver: config,
        report: CvSummaryBody {
            mode: &report.mode,
            max_size: report.max_size,
            n_test: report.n_test,
            n_cv: report.n_cv,
            unconverged_fits: report.unconverged_fits,
            summary: &report.summary,
            replicates: &report.replicates,
            k_opt_counts: counts.into_iter().collect(),
        },
    };
    let mut jw = create(&json_path)?;
    serde_json::to_writer_pretty(&mut jw, &body)?;
    jw.write_all(b"\n")?;
    jw.flush()?;
    Ok(())
}

fn cmd_cv(args: &CvArgs) -> Result<bool> {
    let settings = resolve(&args.model)?;
    let data = load_data(&args.data)?;
    warn_binary(&data, &settings.solver);
    let fc = &settings.file.cv;
    let folds = args.folds.or(fc.folds).unwrap_or(5);
    let test = match (args.test_size, args.test_fraction) {
        (Some(s), _) => TestSplit::Size(s),
        (None, Some(f)) => TestSplit::Fraction(f),
        (None, None) => match (fc.test_size, fc.test_fraction) {
            (Some(s), _) => TestSplit::Size(s),
            (None, Some(f)) => TestSplit::Fraction(f),
            (None, None) => TestSplit::Fraction(0.2),
        },
    };
    let mode = match settings.kernel {
        None => CvMode::Linear,
        Some(Gamma::Auto) => CvMode::Kernel { gamma: None },
        Some(Gamma::Fixed(g)) => CvMode::Kernel { gamma: Some(g) },
    };
    let grid = match args.grid.as_deref() {
        Some(g) => parse_grid(g)?,
        None => match &fc.grid {
            Some(g) => g.clone(),
            None => {
                let max = match mode {
                    CvMode::Linear => data.n_features(),
                    CvMode::Kernel { .. } => {
                        // smallest training fold of the plan
                        let probe = CvPlan {
                            replicates: 1,
                            folds,
                            test,
                            grid: vec![0],
                            seed: 0,
                        };
                        let parts = model_selection::partition(&data, &probe)?;
                        parts[0].folds.iter().map(|(t, _)| t.len()).min().unwrap_or(0)
                    }
                };
                model_selection::default_grid(max)
            }
        },
    };
    let plan = CvPlan {
        replicates: args.replicates.or(fc.replicates).unwrap_or(10),
        folds,
        test,
        grid,
        seed: args.seed.or(fc.seed).unwrap_or(0),
    };
    let report = model_selection::run_cv(&data, &plan, &settings.solver, mode)?;
    write_cv(&args.out, &data, &plan, &settings.solver, &report)?;
    let s = &report.summary.test_error;
    eprintln!(
        "test error median {} (95% interval {} to {}); k_opt median {}",
        s.median, s.lower, s.upper, report.summary.k_opt.median
    );
    Ok(true)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<bool> {
    let recipe = match args.recipe {
        RecipeArg::Clouds => Recipe::Clouds {
            sigma: args.sigma.unwrap_or(0.25),
        },
        RecipeArg::Circles => Recipe::Circles {
            classes: args.classes.unwrap_or(3),
            p_bayes: args.p_bayes,
        },
        RecipeArg::Waveform => Recipe::Waveform,
        RecipeArg::Tenclouds => Recipe::Tenclouds {
            features: args.features,
            classes: args.classes.unwrap_or(10),
            d: args.d,
            sigma: args.sigma.unwrap_or(1.0),
        },
    };
    let out = datagen::generate(&SimSpec {
        recipe,
        n: args.n,
        seed: args.seed,
    })?;
    out.dataset.write_csv(create(&args.out)?, &args.label)?;
    if let Some(path) = &args.truth {
        let truth = out
            .ground_truth
            .ok_or_else(|| VdaError::config("--truth is only available for the tenclouds recipe"))?;
        let mut w = csv::Writer::from_writer(create(path)?);
        let header: Vec<String> = (1..=truth.coefficients.ncols()).map(|j| format!("b{j}")).collect();
        w.write_record(&header)?;
        for row in truth.coefficients.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
    }
    Ok(true)
}

fn cmd_predict(args: &PredictArgs) -> Result<bool> {
    let model = ModelFile::load(&args.model)?;
    let (x, names) = dataset::read_features(File::open(&args.input)?, args.label.as_deref())?;
    if names.len() != model.feature_names.len() {
        return Err(VdaError::shape(format!(
            "model expects {} features, input has {}",
            model.feature_names.len(),
            names.len()
        )));
    }
    let labels = model.predict_names(&x)?;
    let mut w = csv::Writer::from_writer(create(&args.out)?);
    w.write_record(["predicted"])?;
    for l in labels {
        w.write_record([l])?;
    }
    w.flush()?;
    Ok(true)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Path(a) => cmd_path(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Predict(a) => cmd_predict(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
///
/// Exit codes: 0 on success, 1 on runtime failure or non-convergence of a
/// single fit, 2 on usage and configuration errors.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("5, 3,0").unwrap(), vec![5, 3, 0]);
        assert!(parse_grid("5,x").unwrap_err().is_usage());
    }

    #[test]
    fn gamma_parsing() {
        assert_eq!(parse_gamma("auto").unwrap(), Gamma::Auto);
        assert_eq!(parse_gamma("2.5").unwrap(), Gamma::Fixed(2.5));
        assert!(parse_gamma("-1").is_err());
        assert!(parse_gamma("wide").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vda.toml");
        std::fs::write(&path, "[solver]\nepsilon = 0.4\nrho0 = 2.0\n[kernel]\ngamma = 3\n").unwrap();
        let args = ModelArgs {
            config: Some(path.clone()),
            rho0: Some(5.0),
            ..Default::default()
        };
        let r = resolve(&args).unwrap();
        assert_eq!(r.solver.epsilon, Some(0.4));
        assert_eq!(r.solver.annealing.rho0, 5.0);
        assert_eq!(r.kernel, Some(Gamma::Fixed(3.0)));
        std::fs::write(&path, "[solver]\nepsilon = \"big\"\n").unwrap();
        assert!(resolve(&args).unwrap_err().is_usage());
        std::fs::write(&path, "[solvr]\n").unwrap();
        assert!(resolve(&args).unwrap_err().is_usage());
    }
}
