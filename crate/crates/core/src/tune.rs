//! Grid search over `(λ1, λ2, λ3)` with k-fold cross-validation.

use std::fmt::Write as _;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::kfold;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::harness::ModelKind;
use crate::kernel::{cross_gram, gram};
use crate::metrics::Metric;
use crate::model::Predictor;
use crate::params::HyperParams;
use crate::solver::{fit_kernel_with_gram, fit_linear};

/// `{1e-4, 1e-3, ..., 1e2}`
pub fn default_lambda_grid() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    pub lambda3_grid: Vec<f64>,
    pub folds: usize,
    /// Direction comes from [`Metric::higher_is_better`].
    pub selection_metric: Metric,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lambda1_grid: default_lambda_grid(),
            lambda2_grid: default_lambda_grid(),
            lambda3_grid: default_lambda_grid(),
            folds: 5,
            selection_metric: Metric::AveragePrecision,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("lambda1", &self.lambda1_grid),
            ("lambda2", &self.lambda2_grid),
            ("lambda3", &self.lambda3_grid),
        ] {
            if g.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} grid is empty")));
            }
            if let Some(v) = g.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "{name} grid values must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("at least two folds are needed".into()));
        }
        Ok(())
    }

    /// Cells in table order: λ1 outermost, λ3 innermost.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &l1 in &self.lambda1_grid {
            for &l2 in &self.lambda2_grid {
                for &l3 in &self.lambda3_grid {
                    out.push((l1, l2, l3));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Validation metric per fold; empty when the cell failed.
    pub fold_scores: Vec<f64>,
    pub mean: Option<f64>,
    pub error: Option<String>,
}

impl CellResult {
    fn key(&self) -> (f64, f64, f64) {
        (self.lambda3, self.lambda2, self.lambda1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: HyperParams,
    pub best_index: usize,
    pub metric: Metric,
    pub folds: usize,
    pub cells: Vec<CellResult>,
}

impl GridResult {
    /// `lambda1,lambda2,lambda3,status,fold_0,...,mean`; failed cells leave the numbers empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda1,lambda2,lambda3,status");
        for f in 0..self.folds {
            write!(out, ",fold_{f}").expect("string write");
        }
        out.push_str(",mean\n");
        for c in &self.cells {
            let status = if c.error.is_some() { "failed" } else { "ok" };
            write!(out, "{:?},{:?},{:?},{status}", c.lambda1, c.lambda2, c.lambda3).expect("string write");
            for f in 0..self.folds {
                match c.fold_scores.get(f) {
                    Some(v) => write!(out, ",{v:?}"),
                    None => write!(out, ","),
                }
                .expect("string write");
            }
            match c.mean {
                Some(m) => writeln!(out, ",{m:?}"),
                None => writeln!(out, ","),
            }
            .expect("string write");
        }
        out
    }
}

struct Fold {
    train: Dataset,
    val: Dataset,
    /// Training Gram matrix and train/validation cross Gram for kernel fits.
    grams: Option<(Array2<f64>, Array2<f64>)>,
}

fn prepare_folds(ds: &Dataset, grid: &GridSpec, hp: &HyperParams, kind: ModelKind) -> Result<Vec<Fold>> {
    kfold(ds, grid.folds, grid.seed)?
        .into_par_iter()
        .map(|(train, val)| {
            let grams = match kind {
                ModelKind::Linear => None,
                ModelKind::Kernel => {
                    let k = gram(&hp.kernel, train.features().view());
                    let kc = cross_gram(&hp.kernel, train.features().view(), val.features().view())?;
                    Some((k, kc))
                }
            };
            Ok(Fold { train, val, grams })
        })
        .collect()
}

fn fold_score(fold: &Fold, hp: &HyperParams, kind: ModelKind, metric: Metric) -> Result<f64> {
    let scores = match (kind, &fold.grams) {
        (ModelKind::Kernel, Some((k, kc))) => {
            let (model, _) = fit_kernel_with_gram(&fold.train, k, hp)?;
            kc.t().dot(&model.coefficients)
        }
        _ => {
            let (model, _) = fit_linear(&fold.train, hp)?;
            model.scores(fold.val.features().view())?.scores
        }
    };
    let value = metric.compute(scores.view(), fold.val.labels().view())?;
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    Ok(value)
}

/// Exhaustive search. `hp_base` supplies the solver settings and kernel;
/// its λ values are ignored. Cells that fail are kept in the table and
/// excluded from selection. Ties go to the smaller `λ3`, then `λ2`, then `λ1`.
pub fn grid_search(ds: &Dataset, grid: &GridSpec, hp_base: &HyperParams, kind: ModelKind) -> Result<GridResult> {
    grid.validate()?;
    hp_base.validate()?;
    let folds = prepare_folds(ds, grid, hp_base, kind)?;
    let metric = grid.selection_metric;

    let cells: Vec<CellResult> = grid
        .cells()
        .into_par_iter()
        .map(|(l1, l2, l3)| {
            let hp = hp_base.with_lambdas(l1, l2, l3);
            let scores: Result<Vec<f64>> = folds.iter().map(|f| fold_score(f, &hp, kind, metric)).collect();
            let (fold_scores, mean, error) = match scores {
                Ok(s) => {
                    let mean = s.iter().sum::<f64>() / s.len() as f64;
                    (s, Some(mean), None)
                }
                Err(e) => (Vec::new(), None, Some(e.to_string())),
            };
            CellResult {
                lambda1: l1,
                lambda2: l2,
                lambda3: l3,
                fold_scores,
                mean,
                error,
            }
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, c) in cells.iter().enumerate() {
        let Some(m) = c.mean else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let bm = cells[b].mean.expect("selected cells have a mean");
                let wins = metric.better(m, bm) || (m == bm && c.key() < cells[b].key());
                Some(if wins { i } else { b })
            }
        };
    }
    let best_index = best.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "every grid cell failed; first error: {}",
            cells[0].error.as_deref().unwrap_or("unknown")
        ))
    })?;
    let c = &cells[best_index];
    Ok(GridResult {
        best: hp_base.with_lambdas(c.lambda1, c.lambda2, c.lambda3),
        best_index,
        metric,
        folds: grid.folds,
        cells,
    })
}
