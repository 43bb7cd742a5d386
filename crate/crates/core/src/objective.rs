//! Smooth part of the training objective and its gradient, in weight space
//! (linear model) and in coefficient space (kernel model).
//!
//! Both formulations share the same score-level losses. With `S` the score
//! matrix (`XW` or `KA`):
//!
//! ```text
//! br(S)      = 1/2 Σ_ij max(0, 1 - y_ij s_ij)^2
//! rank(S)    = 1/2 Σ_i 1/(|Y_i+||Y_i-|) Σ_{p∈Y_i+, q∈Y_i-} max(0, 2 - (s_ip - s_iq))^2
//! f_linear   = br(XW) + λ1/2 ‖W‖_F^2   + λ2 rank(XW)
//! f_kernel   = br(KA) + λ1/2 Tr(AᵀKA)  + λ2 rank(KA)
//! ```
//!
//! Rows whose relevant or irrelevant set is empty are skipped by `rank`.
//! A hinge sitting exactly on its margin contributes neither loss nor slope.

use ndarray::{Array2, ArrayView2, Zip};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::symmetrized;
use crate::lowrank::singular_values;
use crate::params::HyperParams;

/// Value of the smooth part together with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothEval {
    pub value: f64,
    pub gradient: Array2<f64>,
}

/// Score-level loss values and, optionally, `∂(br + λ2 rank)/∂S`.
pub(crate) struct ScoreTerms {
    pub br: f64,
    pub ranking: f64,
    pub d_scores: Option<Array2<f64>>,
}

pub(crate) fn score_terms(
    scores: ArrayView2<f64>,
    ds: &Dataset,
    lambda2: f64,
    with_grad: bool,
) -> ScoreTerms {
    let labels = ds.labels();
    let mut d = with_grad.then(|| Array2::<f64>::zeros(scores.dim()));

    let mut br = 0.0;
    for ((i, j), &s) in scores.indexed_iter() {
        let y = labels[[i, j]];
        let margin = 1.0 - y * s;
        if margin > 0.0 {
            br += margin * margin;
            if let Some(d) = d.as_mut() {
                d[[i, j]] = -y * margin;
            }
        }
    }

    let mut ranking = 0.0;
    for i in 0..ds.n_instances() {
        if !ds.is_ranking_usable(i) {
            continue;
        }
        let (pos, neg) = (ds.relevant(i), ds.irrelevant(i));
        let c = 1.0 / (pos.len() * neg.len()) as f64;
        let row = scores.row(i);
        let mut row_sum = 0.0;
        for &p in pos {
            for &q in neg {
                let h = 2.0 - (row[p] - row[q]);
                if h > 0.0 {
                    row_sum += h * h;
                    if let Some(d) = d.as_mut() {
                        let g = lambda2 * c * h;
                        d[[i, p]] -= g;
                        d[[i, q]] += g;
                    }
                }
            }
        }
        ranking += c * row_sum;
    }

    ScoreTerms {
        br: 0.5 * br,
        ranking: 0.5 * ranking,
        d_scores: d,
    }
}

/// A smooth objective over a parameter matrix whose scores are linear in it.
pub(crate) trait SmoothProblem {
    fn param_dim(&self) -> (usize, usize);

    /// `XW` or `KA`.
    fn scores(&self, param: &Array2<f64>) -> Array2<f64>;

    /// Smooth value at `param` (whose scores are `scores`), plus the gradient if asked.
    fn eval(
        &self,
        param: &Array2<f64>,
        scores: &Array2<f64>,
        with_grad: bool,
    ) -> (f64, Option<Array2<f64>>);
}

pub(crate) struct LinearProblem<'a> {
    pub ds: &'a Dataset,
    pub hp: &'a HyperParams,
}

impl SmoothProblem for LinearProblem<'_> {
    fn param_dim(&self) -> (usize, usize) {
        (self.ds.n_features(), self.ds.n_labels())
    }

    fn scores(&self, w: &Array2<f64>) -> Array2<f64> {
        self.ds.features().dot(w)
    }

    fn eval(
        &self,
        w: &Array2<f64>,
        scores: &Array2<f64>,
        with_grad: bool,
    ) -> (f64, Option<Array2<f64>>) {
        let hp = self.hp;
        let terms = score_terms(scores.view(), self.ds, hp.lambda2, with_grad);
        let frob2: f64 = w.iter().map(|v| v * v).sum();
        let value = terms.br + 0.5 * hp.lambda1 * frob2 + hp.lambda2 * terms.ranking;
        let grad = terms.d_scores.map(|d| {
            let mut g = self.ds.features().t().dot(&d);
            g.scaled_add(hp.lambda1, w);
            g
        });
        (value, grad)
    }
}

/// `k` must already be symmetric.
pub(crate) struct KernelProblem<'a> {
    pub ds: &'a Dataset,
    pub k: &'a Array2<f64>,
    pub hp: &'a HyperParams,
}

impl SmoothProblem for KernelProblem<'_> {
    fn param_dim(&self) -> (usize, usize) {
        (self.ds.n_instances(), self.ds.n_labels())
    }

    fn scores(&self, a: &Array2<f64>) -> Array2<f64> {
        self.k.dot(a)
    }

    fn eval(
        &self,
        a: &Array2<f64>,
        scores: &Array2<f64>,
        with_grad: bool,
    ) -> (f64, Option<Array2<f64>>) {
        let hp = self.hp;
        let terms = score_terms(scores.view(), self.ds, hp.lambda2, with_grad);
        // Tr(AᵀKA) = Σ A ∘ (KA)
        let quad = Zip::from(a).and(scores).fold(0.0, |acc, x, y| acc + x * y);
        let value = terms.br + 0.5 * hp.lambda1 * quad + hp.lambda2 * terms.ranking;
        let grad = terms.d_scores.map(|d| {
            let mut g = self.k.dot(&d);
            g.scaled_add(hp.lambda1, scores);
            g
        });
        (value, grad)
    }
}

fn check_param(param: ArrayView2<f64>, rows: usize, ds: &Dataset, what: &str) -> Result<()> {
    if param.dim() != (rows, ds.n_labels()) {
        return Err(Error::ShapeMismatch(format!(
            "{what} is {:?}, expected ({rows}, {})",
            param.dim(),
            ds.n_labels()
        )));
    }
    Ok(())
}

fn check_weights(w: ArrayView2<f64>, ds: &Dataset) -> Result<()> {
    check_param(w, ds.n_features(), ds, "weight matrix")
}

/// `1/2 Σ_ij max(0, 1 - y_ij <w_j, x_i>)^2`
pub fn br_loss_linear(w: ArrayView2<f64>, ds: &Dataset) -> Result<f64> {
    check_weights(w, ds)?;
    let scores = ds.features().dot(&w);
    Ok(score_terms(scores.view(), ds, 0.0, false).br)
}

/// Pairwise squared-hinge ranking term (without the `λ2` factor).
pub fn ranking_loss_term_linear(w: ArrayView2<f64>, ds: &Dataset) -> Result<f64> {
    check_weights(w, ds)?;
    let scores = ds.features().dot(&w);
    Ok(score_terms(scores.view(), ds, 0.0, false).ranking)
}

/// Smooth objective and gradient in weight space. `ds` should already carry
/// the bias column if one is wanted.
pub fn smooth_eval_linear(
    w: ArrayView2<f64>,
    ds: &Dataset,
    hp: &HyperParams,
) -> Result<SmoothEval> {
    check_weights(w, ds)?;
    let w = w.to_owned();
    let problem = LinearProblem { ds, hp };
    let scores = problem.scores(&w);
    let (value, gradient) = problem.eval(&w, &scores, true);
    Ok(SmoothEval {
        value,
        gradient: gradient.expect("gradient requested"),
    })
}

/// Smooth objective and gradient in coefficient space for Gram matrix `k`.
pub fn smooth_eval_kernel(
    a: ArrayView2<f64>,
    k: ArrayView2<f64>,
    ds: &Dataset,
    hp: &HyperParams,
) -> Result<SmoothEval> {
    let k = checked_gram(k, ds)?;
    check_param(a, ds.n_instances(), ds, "coefficient matrix")?;
    let a = a.to_owned();
    let problem = KernelProblem { ds, k: &k, hp };
    let scores = problem.scores(&a);
    let (value, gradient) = problem.eval(&a, &scores, true);
    Ok(SmoothEval {
        value,
        gradient: gradient.expect("gradient requested"),
    })
}

pub(crate) fn checked_gram(k: ArrayView2<f64>, ds: &Dataset) -> Result<Array2<f64>> {
    if k.dim() != (ds.n_instances(), ds.n_instances()) {
        return Err(Error::ShapeMismatch(format!(
            "kernel matrix is {:?}, expected {n}x{n}",
            k.dim(),
            n = ds.n_instances()
        )));
    }
    symmetrized(k)
}

/// Sum of singular values. Returns NaN if the decomposition fails to converge.
pub fn trace_norm(m: ArrayView2<f64>) -> f64 {
    singular_values(m).map_or(f64::NAN, |s| s.iter().sum())
}

/// Smooth value plus `λ3 ‖param‖_*`. Pass the Gram matrix to evaluate the
/// kernel objective, `None` for the linear one.
pub fn full_objective(
    param: ArrayView2<f64>,
    ds: &Dataset,
    kernel: Option<ArrayView2<f64>>,
    hp: &HyperParams,
) -> Result<f64> {
    let smooth = match kernel {
        None => smooth_eval_linear(param, ds, hp)?.value,
        Some(k) => smooth_eval_kernel(param, k, ds, hp)?.value,
    };
    if hp.lambda3 == 0.0 {
        return Ok(smooth);
    }
    Ok(smooth + hp.lambda3 * trace_norm(param))
}
