//! `rbrl` command-line tool.
//!
//! Every command writes its outputs plus a `config.json` describing the
//! resolved run into `--out`. Exit codes: 0 success, 2 usage, 3 parse or I/O
//! failure, 4 invalid input or configuration, 5 numerical failure.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbrl::data::{load_dataset, DataFormat, SplitPlan};
use rbrl::error::ErrorClass;
use rbrl::harness::{self, BenchConfig, ModelKind, SweepAxis, SweepConfig};
use rbrl::metrics::{evaluate_all, skipped_rows, EvalReport, Metric};
use rbrl::model_io::{load_model, parse_predictions, predictions_to_string, save_model};
use rbrl::params::DEFAULT_REL_TOL;
use rbrl::tune::{grid_search, GridSpec};
use rbrl::{Dataset, Error, HyperParams, KernelSpec, Predictor, Result};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "rbrl", version, about = "Multi-label classifier with ranking and trace-norm regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model and write it with its objective trace.
    Train(TrainArgs),
    /// Score a dataset with a saved model.
    Predict(PredictArgs),
    /// Compute the six metrics for a model or a predictions file.
    Evaluate(EvaluateArgs),
    /// Cross-validated grid search over the three trade-off weights.
    Tune(TuneArgs),
    /// Repeated random splits with optional tuning and the ranking-free variant.
    Bench(BenchArgs),
    /// Metrics as one hyperparameter varies with the rest fixed.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FormatArg {
    DenseCsv,
    SparseMll,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::DenseCsv => DataFormat::DenseCsv,
            FormatArg::SparseMll => DataFormat::SparseMll,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindArg {
    Linear,
    Kernel,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AxisArg {
    Lambda1,
    Lambda2,
    Lambda3,
    Gamma,
}

#[derive(Args, Debug, Serialize)]
struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "dense-csv")]
    format: FormatArg,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        load_dataset(&self.data, self.format.into())
    }
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    #[arg(long = "model-kind", value_enum, default_value = "linear")]
    model_kind: KindArg,
    /// Kernel for the kernel model.
    #[arg(long, value_enum, default_value = "rbf")]
    kernel: KernelArg,
    /// RBF width; defaults to 1 / (number of features).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-2)]
    lambda1: f64,
    #[arg(long, default_value_t = 1e-2)]
    lambda2: f64,
    #[arg(long, default_value_t = 1e-2)]
    lambda3: f64,
    #[arg(long = "rel-tol", default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Defaults to 1000 for the linear model and 3000 for the kernel model.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Reject proximal steps that raise the objective (non-increasing trace).
    #[arg(long)]
    monotone: bool,
}

impl ModelArgs {
    fn kind(&self) -> ModelKind {
        match self.model_kind {
            KindArg::Linear => ModelKind::Linear,
            KindArg::Kernel => ModelKind::Kernel,
        }
    }

    fn hyper_params(&self, n_features: usize) -> Result<HyperParams> {
        let hp = match self.model_kind {
            KindArg::Linear => {
                if self.gamma.is_some() {
                    return Err(Error::InvalidConfig("--gamma applies to the kernel model only".into()));
                }
                HyperParams::linear(self.lambda1, self.lambda2, self.lambda3)
            }
            KindArg::Kernel => {
                let spec = match self.kernel {
                    KernelArg::Linear => {
                        if self.gamma.is_some() {
                            return Err(Error::InvalidConfig("--gamma needs --kernel rbf".into()));
                        }
                        KernelSpec::Linear
                    }
                    KernelArg::Rbf => match self.gamma {
                        Some(gamma) => KernelSpec::Rbf { gamma },
                        None => KernelSpec::rbf_default(n_features),
                    },
                };
                HyperParams::kernel(self.lambda1, self.lambda2, self.lambda3, spec)
            }
        };
        let hp = hp.with_rel_tol(self.rel_tol).with_monotone(self.monotone);
        let hp = match self.max_iters {
            Some(n) => hp.with_max_iters(n),
            None => hp,
        };
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    /// Comma-separated λ1 values; defaults to 1e-4,...,1e2.
    #[arg(long = "lambda1-grid", value_delimiter = ',')]
    lambda1_grid: Option<Vec<f64>>,
    #[arg(long = "lambda2-grid", value_delimiter = ',')]
    lambda2_grid: Option<Vec<f64>>,
    #[arg(long = "lambda3-grid", value_delimiter = ',')]
    lambda3_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Selection metric: hal, sa, f1e, ral, cov or ap.
    #[arg(long, default_value = "ap")]
    metric: String,
}

impl GridArgs {
    fn grid(&self, seed: u64) -> Result<GridSpec> {
        let d = GridSpec::default();
        let grid = GridSpec {
            lambda1_grid: self.lambda1_grid.clone().unwrap_or(d.lambda1_grid),
            lambda2_grid: self.lambda2_grid.clone().unwrap_or(d.lambda2_grid),
            lambda3_grid: self.lambda3_grid.clone().unwrap_or(d.lambda3_grid),
            folds: self.folds,
            selection_metric: self.metric.parse::<Metric>()?,
            seed,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long = "train-fraction", default_value_t = 0.6)]
    train_fraction: f64,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Write the model as JSON instead of the binary layout.
    #[arg(long = "text-model")]
    text_model: bool,
    /// Recorded for reproducibility; training itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    /// Ground truth dataset.
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    model: Option<PathBuf>,
    /// Predictions file written by `predict`.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Tune λ1, λ2, λ3 on every training split.
    #[arg(long)]
    tune: bool,
    #[command(flatten)]
    grid: GridArgs,
    /// Also report the variant trained with λ2 = 0.
    #[arg(long)]
    ablation: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma-separated values; defaults to the λ grid or 1e-3/m,...,1e3/m for gamma.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_config<A: Serialize>(dir: &Path, command: &str, args: &A, resolved: serde_json::Value) -> Result<()> {
    let config = serde_json::json!({
        "command": command,
        "args": args,
        "resolved": resolved,
    });
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
    Ok(())
}

fn report_csv(r: &EvalReport) -> String {
    let names: Vec<&str> = Metric::ALL.iter().map(|m| m.short_name()).collect();
    let values: Vec<String> = r.values().iter().map(|v| format!("{v:?}")).collect();
    format!("{}\n{}\n", names.join(","), values.join(","))
}

fn write_report(dir: &Path, r: &EvalReport) -> Result<()> {
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(r)? + "\n")?;
    fs::write(dir.join("report.csv"), report_csv(r))?;
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let ds = a.data.load()?;
    let hp = a.model.hyper_params(ds.n_features())?;
    prepare_out(&a.out)?;
    let (model, trace) = harness::fit(&ds, &hp, a.model.kind())?;
    let model_path = a.out.join(if a.text_model { "model.json" } else { "model.bin" });
    save_model(&model, &model_path)?;
    fs::write(a.out.join("trace.csv"), trace.to_csv())?;
    write_config(
        &a.out,
        "train",
        a,
        serde_json::json!({ "hyper_params": hp, "model_kind": a.model.kind() }),
    )?;
    println!(
        "{} iterations ({:?}), final objective {:.6e}, model written to {}",
        trace.iterations,
        trace.stop_reason,
        trace.final_objective(),
        model_path.display()
    );
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let ds = a.data.load()?;
    let model = load_model(&a.model)?;
    let (scores, labels) = model.predict(ds.features().view())?;
    prepare_out(&a.out)?;
    fs::write(a.out.join("predictions.csv"), predictions_to_string(&scores, &labels)?)?;
    write_config(&a.out, "predict", a, serde_json::Value::Null)?;
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let ds = a.data.load()?;
    let (scores, labels) = match (&a.model, &a.predictions) {
        (Some(path), _) => {
            let model = load_model(path)?;
            if model.n_labels() != ds.n_labels() {
                return Err(Error::ShapeMismatch(format!(
                    "model predicts {} labels, dataset has {}",
                    model.n_labels(),
                    ds.n_labels()
                )));
            }
            model.predict(ds.features().view())?
        }
        (None, Some(path)) => parse_predictions(&fs::read_to_string(path)?)?,
        (None, None) => unreachable!("clap requires one of --model and --predictions"),
    };
    let report = evaluate_all(scores.scores.view(), labels.labels.view(), ds.labels().view())?;
    let skipped = skipped_rows(ds.labels().view());
    if skipped.ranking_loss > 0 {
        eprintln!(
            "rows left out: {} of {} for ral, {} for cov and ap",
            skipped.ranking_loss,
            ds.n_instances(),
            skipped.coverage
        );
    }
    prepare_out(&a.out)?;
    fs::write(a.out.join("skipped_rows.json"), serde_json::to_string_pretty(&skipped)? + "\n")?;
    write_report(&a.out, &report)?;
    write_config(&a.out, "evaluate", a, serde_json::Value::Null)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn tune(a: &TuneArgs) -> Result<()> {
    let ds = a.data.load()?;
    let hp = a.model.hyper_params(ds.n_features())?;
    let grid = a.grid.grid(a.seed)?;
    prepare_out(&a.out)?;
    let result = grid_search(&ds, &grid, &hp, a.model.kind())?;
    fs::write(a.out.join("tune.csv"), result.to_csv())?;
    fs::write(a.out.join("best.json"), serde_json::to_string_pretty(&result.best)? + "\n")?;
    write_config(
        &a.out,
        "tune",
        a,
        serde_json::json!({ "grid": grid, "base": hp, "model_kind": a.model.kind() }),
    )?;
    let b = &result.best;
    println!(
        "best lambda1={:e} lambda2={:e} lambda3={:e} ({} {:?})",
        b.lambda1,
        b.lambda2,
        b.lambda3,
        result.metric,
        result.cells[result.best_index].mean
    );
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let ds = a.data.load()?;
    let hp = a.model.hyper_params(ds.n_features())?;
    let plan = SplitPlan {
        seed: a.seed,
        train_fraction: a.split.train_fraction,
        repeats: a.split.repeats,
    };
    plan.validate()?;
    let grid = if a.tune { Some(a.grid.grid(a.seed)?) } else { None };
    let cfg = BenchConfig {
        kind: a.model.kind(),
        hp,
        grid,
        plan,
        ablation: a.ablation,
    };
    prepare_out(&a.out)?;
    write_config(&a.out, "bench", a, serde_json::to_value(&cfg)?)?;

    let mut repeats = File::create(a.out.join("repeats.csv"))?;
    repeats.write_all(harness::repeat_csv_header().as_bytes())?;
    let mut timings = File::create(a.out.join("timings.csv"))?;
    timings.write_all(harness::timings_csv(&[]).as_bytes())?;
    let report = harness::bench(&ds, &cfg, |r, t| {
        repeats.write_all(harness::repeat_csv_row(r).as_bytes())?;
        repeats.flush()?;
        let row = harness::timings_csv(std::slice::from_ref(t));
        timings.write_all(row.lines().nth(1).map(|l| format!("{l}\n")).unwrap_or_default().as_bytes())?;
        timings.flush()?;
        eprintln!("repeat {} ({}) done", r.repeat, r.variant.name());
        Ok(())
    })?;
    fs::write(a.out.join("summary.csv"), report.summary_csv())?;
    fs::write(a.out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    fs::write(a.out.join("table.txt"), report.table())?;
    print!("{}", report.table());
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let ds = a.data.load()?;
    let hp = a.model.hyper_params(ds.n_features())?;
    let axis = match a.axis {
        AxisArg::Lambda1 => SweepAxis::Lambda1,
        AxisArg::Lambda2 => SweepAxis::Lambda2,
        AxisArg::Lambda3 => SweepAxis::Lambda3,
        AxisArg::Gamma => SweepAxis::Gamma,
    };
    let cfg = SweepConfig {
        kind: a.model.kind(),
        hp,
        axis,
        values: a.values.clone().unwrap_or_else(|| axis.default_values(ds.n_features())),
        plan: SplitPlan {
            seed: a.seed,
            train_fraction: a.split.train_fraction,
            repeats: a.split.repeats,
        },
    };
    prepare_out(&a.out)?;
    write_config(&a.out, "sweep", a, serde_json::to_value(&cfg)?)?;
    let result = harness::sweep(&ds, &cfg)?;
    let csv = result.to_csv();
    fs::write(a.out.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Parse => 3,
        ErrorClass::Validation => 4,
        ErrorClass::Numeric => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Tune(a) => tune(a),
        Command::Bench(a) => bench(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = match e.class() {
                ErrorClass::Parse => "parse error",
                ErrorClass::Validation => "invalid input",
                ErrorClass::Numeric => "numerical failure",
            };
            match &e {
                Error::Parse { .. } => eprintln!("rbrl: {e}"),
                _ => eprintln!("rbrl: {class}: {e}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
