//! Accelerated proximal gradient training for the linear and kernel models.
//!
//! Both loops start from the zero matrix and iterate
//!
//! ```text
//! P_t     = svt(G_t - ∇f(G_t) / L_f, λ3 / L_f)
//! b_{t+1} = (1 + sqrt(1 + 4 b_t^2)) / 2
//! G_{t+1} = P_t + (b_t - 1) / b_{t+1} (P_t - P_{t-1})
//! ```
//!
//! with `b_1 = 1` and a fixed step `1 / L_f`. The composite objective
//! (smooth part plus `λ3 ‖P_t‖_*`) is recorded after every iteration; the loop
//! stops once its relative change `|F_t - F_{t-1}| / max(1, |F_{t-1}|)` drops
//! below `rel_tol`, or after `max_iters` iterations.
//!
//! This loop is not a descent method: the recorded objective can rise for a
//! few iterations. With [`HyperParams::monotone`] set, the proximal point `Z_t`
//! only replaces `P_{t-1}` when it does not raise the objective, and the
//! extrapolation becomes
//!
//! ```text
//! G_{t+1} = P_t + b_t / b_{t+1} (Z_t - P_t) + (b_t - 1) / b_{t+1} (P_t - P_{t-1})
//! ```
//!
//! which is the plain update whenever `Z_t` is accepted. The stopping rule then
//! compares `F(Z_t)` with `F_{t-1}`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{augment_bias, Dataset};
use crate::error::{Error, Result};
use crate::kernel::{gram, symmetrized};
use crate::lowrank::{lipschitz_from_gram, lipschitz_linear, svt_with_norm};
use crate::model::{KernelModel, LinearModel};
use crate::objective::{KernelProblem, LinearProblem, SmoothProblem};
use crate::params::HyperParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Objective at the zero initialization.
    pub initial_objective: f64,
    /// Objective after each iteration; `objective_per_iter.len() == iterations`.
    pub objective_per_iter: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub l_f_used: f64,
    /// Training rows ignored by the ranking term.
    pub skipped_ranking_rows: usize,
}

impl SolveTrace {
    pub fn final_objective(&self) -> f64 {
        self.objective_per_iter
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }

    /// `iteration,objective` rows, iteration 0 being the zero initialization.
    /// Values use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective\n");
        out.push_str(&format!("0,{:?}\n", self.initial_objective));
        for (t, f) in self.objective_per_iter.iter().enumerate() {
            out.push_str(&format!("{},{:?}\n", t + 1, f));
        }
        out
    }
}

/// `(1 + sqrt(1 + 4 b^2)) / 2`
#[inline]
pub fn next_momentum(b: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * b * b).sqrt())
}

fn apg<P: SmoothProblem>(
    problem: &P,
    hp: &HyperParams,
    l_f: f64,
    skipped_ranking_rows: usize,
) -> Result<(Array2<f64>, SolveTrace)> {
    // An all-zero bound means the smooth part is constant; any step is exact.
    let l_f = if l_f > 0.0 { l_f } else { 1.0 };
    let step = 1.0 / l_f;
    let threshold = hp.lambda3 * step;

    let mut prev = Array2::<f64>::zeros(problem.param_dim());
    let mut prev_scores = problem.scores(&prev);
    let (initial_objective, _) = problem.eval(&prev, &prev_scores, false);
    if !initial_objective.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }

    let mut search = prev.clone();
    let mut search_scores = prev_scores.clone();
    let mut b = 1.0;
    let mut last = initial_objective;
    let mut objectives = Vec::new();
    let mut stop_reason = StopReason::MaxIters;

    for t in 1..=hp.max_iters {
        let (_, grad) = problem.eval(&search, &search_scores, true);
        let mut point = search;
        point.scaled_add(-step, &grad.expect("gradient requested"));
        let (prox, norm) = svt_with_norm(point.view(), threshold)?;

        let prox_scores = problem.scores(&prox);
        let (smooth, _) = problem.eval(&prox, &prox_scores, false);
        let prox_objective = smooth + norm.map_or(0.0, |n| hp.lambda3 * n);
        if !prox_objective.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: t });
        }
        let rel_change = (prox_objective - last).abs() / last.abs().max(1.0);

        let b_next = next_momentum(b);
        let beta = (b - 1.0) / b_next;
        // scores are linear in the parameter, so the extrapolated point's scores
        // follow from the most recent ones without another product
        let (param, scores, objective) = if hp.monotone && prox_objective > last {
            let gamma = b / b_next;
            search = &prev + &((&prox - &prev) * gamma);
            search_scores = &prev_scores + &((&prox_scores - &prev_scores) * gamma);
            (prev.clone(), prev_scores.clone(), last)
        } else {
            search = &prox + &((&prox - &prev) * beta);
            search_scores = &prox_scores + &((&prox_scores - &prev_scores) * beta);
            (prox, prox_scores, prox_objective)
        };
        objectives.push(objective);
        b = b_next;

        last = objective;
        prev = param;
        prev_scores = scores;
        if rel_change < hp.rel_tol {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let trace = SolveTrace {
        initial_objective,
        iterations: objectives.len(),
        objective_per_iter: objectives,
        stop_reason,
        l_f_used: l_f,
        skipped_ranking_rows,
    };
    Ok((prev, trace))
}

/// Trains the linear model. The bias column is appended here; callers pass raw features.
pub fn fit_linear(ds: &Dataset, hp: &HyperParams) -> Result<(LinearModel, SolveTrace)> {
    hp.validate()?;
    let aug = augment_bias(ds);
    let bound = lipschitz_linear(&aug, hp);
    let problem = LinearProblem { ds: &aug, hp };
    let (weights, trace) = apg(&problem, hp, bound.l_f, aug.skipped_ranking_rows())?;
    Ok((LinearModel { weights }, trace))
}

/// Trains the kernel model with the kernel named in `hp`, on raw (unaugmented) features.
pub fn fit_kernel(ds: &Dataset, hp: &HyperParams) -> Result<(KernelModel, SolveTrace)> {
    hp.validate()?;
    let k = gram(&hp.kernel, ds.features().view());
    fit_kernel_with_gram(ds, &k, hp)
}

/// Same as [`fit_kernel`] with a precomputed Gram matrix of `ds`'s features
/// under `hp.kernel`.
pub fn fit_kernel_with_gram(
    ds: &Dataset,
    k: &Array2<f64>,
    hp: &HyperParams,
) -> Result<(KernelModel, SolveTrace)> {
    hp.validate()?;
    if k.dim() != (ds.n_instances(), ds.n_instances()) {
        return Err(Error::ShapeMismatch(format!(
            "kernel matrix is {:?}, expected {n}x{n}",
            k.dim(),
            n = ds.n_instances()
        )));
    }
    let k = symmetrized(k.view())?;
    let bound = lipschitz_from_gram(&k, ds, hp);
    let problem = KernelProblem { ds, k: &k, hp };
    let (coefficients, trace) = apg(&problem, hp, bound.l_f, ds.skipped_ranking_rows())?;
    Ok((
        KernelModel {
            coefficients,
            kernel: hp.kernel,
            train_features: ds.features().clone(),
        },
        trace,
    ))
}
