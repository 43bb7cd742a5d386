//! Repeated-split benchmarking and one-axis sensitivity sweeps.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{split, SplitPlan};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::metrics::{evaluate_all, summarize, EvalReport, Metric, MetricSummary};
use crate::model::Predictor;
use crate::model_io::Model;
use crate::params::HyperParams;
use crate::solver::{fit_kernel, fit_linear, SolveTrace};
use crate::tune::{default_lambda_grid, grid_search, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Kernel,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "kernel" => Ok(ModelKind::Kernel),
            other => Err(Error::InvalidConfig(format!("unknown model kind {other:?}"))),
        }
    }
}

pub fn fit(ds: &Dataset, hp: &HyperParams, kind: ModelKind) -> Result<(Model, SolveTrace)> {
    match kind {
        ModelKind::Linear => fit_linear(ds, hp).map(|(m, t)| (Model::Linear(m), t)),
        ModelKind::Kernel => fit_kernel(ds, hp).map(|(m, t)| (Model::Kernel(m), t)),
    }
}

/// Fits on `train` and scores `test`, returning the metrics and wall-clock seconds.
pub fn fit_and_evaluate(
    train: &Dataset,
    test: &Dataset,
    hp: &HyperParams,
    kind: ModelKind,
) -> Result<(EvalReport, SolveTrace, f64, f64)> {
    let t0 = Instant::now();
    let (model, trace) = fit(train, hp, kind)?;
    let train_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (scores, labels) = model.predict(test.features().view())?;
    let test_seconds = t1.elapsed().as_secs_f64();
    let report = evaluate_all(scores.scores.view(), labels.labels.view(), test.labels().view())?;
    Ok((report, trace, train_seconds, test_seconds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub kind: ModelKind,
    /// Fixed hyperparameters, or the solver settings and kernel when tuning.
    pub hp: HyperParams,
    /// Tune on each training split when set.
    pub grid: Option<GridSpec>,
    pub plan: SplitPlan,
    /// Also run the variant with the ranking term removed (`λ2 = 0`).
    pub ablation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Rbrl,
    Brl,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Rbrl => "rbrl",
            Variant::Brl => "brl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub variant: Variant,
    pub repeat: usize,
    pub hp: HyperParams,
    pub iterations: usize,
    pub report: EvalReport,
}

/// Wall-clock seconds for one repeat; reported apart from the metrics so
/// metric reports stay byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatTiming {
    pub variant: Variant,
    pub repeat: usize,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub variant: Variant,
    pub summary: MetricSummary,
    pub repeats: Vec<RepeatResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    #[serde(skip)]
    pub timings: Vec<RepeatTiming>,
}

impl BenchReport {
    /// One row per variant: `variant,runs,<metric>_mean,<metric>_std,...`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("variant,runs");
        for m in Metric::ALL {
            write!(out, ",{m}_mean,{m}_std").expect("string write");
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{},{}", row.variant.name(), row.summary.runs).expect("string write");
            for m in Metric::ALL {
                write!(out, ",{:?},{:?}", row.summary.mean.get(m), row.summary.std.get(m)).expect("string write");
            }
            out.push('\n');
        }
        out
    }

    /// Table-style `mean±std` rows rounded to three decimals.
    pub fn table(&self) -> String {
        let mut out = String::from("variant");
        for m in Metric::ALL {
            write!(out, "\t{m}").expect("string write");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(row.variant.name());
            for m in Metric::ALL {
                write!(out, "\t{:.3}±{:.3}", row.summary.mean.get(m), row.summary.std.get(m)).expect("string write");
            }
            out.push('\n');
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        timings_csv(&self.timings)
    }
}

pub fn timings_csv(timings: &[RepeatTiming]) -> String {
    let mut out = String::from("variant,repeat,train_seconds,test_seconds\n");
    for t in timings {
        writeln!(out, "{},{},{:.6},{:.6}", t.variant.name(), t.repeat, t.train_seconds, t.test_seconds)
            .expect("string write");
    }
    out
}

/// CSV header for per-repeat rows written by [`repeat_csv_row`].
pub fn repeat_csv_header() -> String {
    let mut out = String::from("variant,repeat,lambda1,lambda2,lambda3,iterations");
    for m in Metric::ALL {
        write!(out, ",{m}").expect("string write");
    }
    out.push('\n');
    out
}

pub fn repeat_csv_row(r: &RepeatResult) -> String {
    let mut out = format!(
        "{},{},{:?},{:?},{:?},{}",
        r.variant.name(),
        r.repeat,
        r.hp.lambda1,
        r.hp.lambda2,
        r.hp.lambda3,
        r.iterations
    );
    for v in r.report.values() {
        write!(out, ",{v:?}").expect("string write");
    }
    out.push('\n');
    out
}

fn run_variant(
    train: &Dataset,
    test: &Dataset,
    cfg: &BenchConfig,
    variant: Variant,
) -> Result<(HyperParams, EvalReport, SolveTrace, f64, f64)> {
    let ablate = |hp: HyperParams| match variant {
        Variant::Rbrl => hp,
        Variant::Brl => hp.with_lambdas(hp.lambda1, 0.0, hp.lambda3),
    };
    let tune_start = Instant::now();
    let hp = match &cfg.grid {
        Some(grid) => {
            let grid = match variant {
                Variant::Rbrl => grid.clone(),
                Variant::Brl => GridSpec {
                    lambda2_grid: vec![0.0],
                    ..grid.clone()
                },
            };
            grid_search(train, &grid, &cfg.hp, cfg.kind)?.best
        }
        None => ablate(cfg.hp),
    };
    let tune_seconds = tune_start.elapsed().as_secs_f64();
    let (report, trace, train_seconds, test_seconds) = fit_and_evaluate(train, test, &hp, cfg.kind)?;
    Ok((hp, report, trace, train_seconds + tune_seconds, test_seconds))
}

/// Runs `plan.repeats` splits, each with optional tuning, a fit and an
/// evaluation. `on_repeat` sees every finished repeat in order, so callers
/// can flush partial results.
pub fn bench(
    ds: &Dataset,
    cfg: &BenchConfig,
    mut on_repeat: impl FnMut(&RepeatResult, &RepeatTiming) -> Result<()>,
) -> Result<BenchReport> {
    cfg.plan.validate()?;
    cfg.hp.validate()?;
    let variants: &[Variant] = if cfg.ablation {
        &[Variant::Rbrl, Variant::Brl]
    } else {
        &[Variant::Rbrl]
    };
    let mut results: Vec<Vec<RepeatResult>> = vec![Vec::new(); variants.len()];
    let mut timings = Vec::new();
    for repeat in 0..cfg.plan.repeats {
        let (train, test) = split(ds, &cfg.plan, repeat)?;
        for (slot, &variant) in variants.iter().enumerate() {
            let (hp, report, trace, train_seconds, test_seconds) = run_variant(&train, &test, cfg, variant)?;
            let result = RepeatResult {
                variant,
                repeat,
                hp,
                iterations: trace.iterations,
                report,
            };
            let timing = RepeatTiming {
                variant,
                repeat,
                train_seconds,
                test_seconds,
            };
            on_repeat(&result, &timing)?;
            results[slot].push(result);
            timings.push(timing);
        }
    }
    let rows = variants
        .iter()
        .zip(results)
        .map(|(&variant, repeats)| {
            let reports: Vec<EvalReport> = repeats.iter().map(|r| r.report).collect();
            BenchRow {
                variant,
                summary: summarize(&reports).expect("at least one repeat"),
                repeats,
            }
        })
        .collect();
    Ok(BenchReport { rows, timings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Lambda1,
    Lambda2,
    Lambda3,
    Gamma,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda1 => "lambda1",
            SweepAxis::Lambda2 => "lambda2",
            SweepAxis::Lambda3 => "lambda3",
            SweepAxis::Gamma => "gamma",
        }
    }

    /// The λ grid, or `{1e-3/m, ..., 1e3/m}` for `gamma`.
    pub fn default_values(self, n_features: usize) -> Vec<f64> {
        match self {
            SweepAxis::Gamma => {
                let m = n_features.max(1) as f64;
                [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3].iter().map(|s| s / m).collect()
            }
            _ => default_lambda_grid(),
        }
    }

    fn apply(self, hp: &HyperParams, v: f64) -> HyperParams {
        match self {
            SweepAxis::Lambda1 => hp.with_lambdas(v, hp.lambda2, hp.lambda3),
            SweepAxis::Lambda2 => hp.with_lambdas(hp.lambda1, v, hp.lambda3),
            SweepAxis::Lambda3 => hp.with_lambdas(hp.lambda1, hp.lambda2, v),
            SweepAxis::Gamma => HyperParams {
                kernel: KernelSpec::Rbf { gamma: v },
                ..*hp
            },
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda1" => Ok(SweepAxis::Lambda1),
            "lambda2" => Ok(SweepAxis::Lambda2),
            "lambda3" => Ok(SweepAxis::Lambda3),
            "gamma" => Ok(SweepAxis::Gamma),
            other => Err(Error::InvalidConfig(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: ModelKind,
    pub hp: HyperParams,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub plan: SplitPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Metric means over the plan's repeats.
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// `<axis>,hal,sa,f1e,ral,cov,ap`, one row per swept value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.axis.name());
        for m in Metric::ALL {
            write!(out, ",{m}").expect("string write");
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{:?}", p.value).expect("string write");
            for v in p.report.values() {
                write!(out, ",{v:?}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

/// Holds every other setting fixed and evaluates each value of one axis,
/// averaging the metrics over the plan's splits.
pub fn sweep(ds: &Dataset, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.plan.validate()?;
    if cfg.values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    if cfg.axis == SweepAxis::Gamma && cfg.kind != ModelKind::Kernel {
        return Err(Error::InvalidConfig("a gamma sweep needs the kernel model".into()));
    }
    let splits: Vec<(Dataset, Dataset)> = (0..cfg.plan.repeats)
        .map(|r| split(ds, &cfg.plan, r))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(cfg.values.len());
    for &value in &cfg.values {
        let hp = cfg.axis.apply(&cfg.hp, value);
        hp.validate()?;
        let reports: Vec<EvalReport> = splits
            .iter()
            .map(|(tr, te)| fit_and_evaluate(tr, te, &hp, cfg.kind).map(|r| r.0))
            .collect::<Result<_>>()?;
        points.push(SweepPoint {
            value,
            report: summarize(&reports).expect("nonempty").mean,
        });
    }
    Ok(SweepResult { axis: cfg.axis, points })
}
