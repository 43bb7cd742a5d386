//! Trace-norm proximal operator and closed-form gradient Lipschitz bounds.

use faer::Mat;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objective::checked_gram;
use crate::params::HyperParams;

fn to_faer(m: ArrayView2<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Singular values of `m`, largest first.
pub fn singular_values(m: ArrayView2<f64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m).singular_values().map_err(|_| Error::SvdFailure)
}

/// Singular value thresholding: `U max(Σ - eps, 0) Vᵀ`, the minimizer of
/// `1/2 ‖Z - M‖_F^2 + eps ‖Z‖_*`.
pub fn svt(m: ArrayView2<f64>, eps: f64) -> Result<Array2<f64>> {
    Ok(svt_with_norm(m, eps)?.0)
}

/// SVT together with the trace norm of its output (`None` when `eps == 0`,
/// in which case the input is returned untouched).
pub(crate) fn svt_with_norm(m: ArrayView2<f64>, eps: f64) -> Result<(Array2<f64>, Option<f64>)> {
    if eps == 0.0 {
        return Ok((m.to_owned(), None));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidHyperParams(format!("svt threshold must be nonnegative, got {eps}")));
    }
    let (r, c) = m.dim();
    if m.is_empty() {
        return Ok((m.to_owned(), Some(0.0)));
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::SvdFailure)?;
    let (u, sigma, v) = (svd.U(), svd.S().column_vector(), svd.V());

    let mut out = Array2::zeros((r, c));
    let mut norm = 0.0;
    for k in 0..sigma.nrows() {
        let shrunk = sigma[k] - eps;
        if shrunk <= 0.0 {
            continue;
        }
        norm += shrunk;
        for i in 0..r {
            let ui = u[(i, k)] * shrunk;
            if ui == 0.0 {
                continue;
            }
            for j in 0..c {
                out[[i, j]] += ui * v[(j, k)];
            }
        }
    }
    Ok((out, Some(norm)))
}

/// Gradient Lipschitz constants of the smooth objective.
///
/// `per_label_a[j] = Σ_i n_ij` and `per_label_b[j] = Σ_i n_ij ‖x_i‖^4 / (|Y_i+| |Y_i-|)^2`,
/// where `n_ij` counts the ranking pairs label `j` takes part in on row `i`
/// (`|Y_i-|` if `j` is relevant, `|Y_i+|` otherwise). For the kernel model
/// `x_i` is the `i`-th Gram column.
///
/// `l_fr_columnwise = sqrt(max_j A_j B_j)` bounds each column of the ranking
/// gradient when only that column moves. When all columns move together the
/// pair differences couple them, and `l_fr = sqrt(2 max_j A_j B_j + 2 max_j A_j max_j B_j)`
/// is the bound that holds; `l_f` is assembled from `l_fr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    pub l_f: f64,
    pub l_fr: f64,
    pub l_fr_columnwise: f64,
    /// `l_f` assembled from `l_fr_columnwise` instead of `l_fr`.
    pub l_f_columnwise: f64,
    pub per_label_a: Vec<f64>,
    pub per_label_b: Vec<f64>,
}

fn ranking_constants(ds: &Dataset, row_sq_norms: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l = ds.n_labels();
    let mut a = vec![0.0; l];
    let mut b = vec![0.0; l];
    for (i, &sq) in row_sq_norms.iter().enumerate() {
        if !ds.is_ranking_usable(i) {
            continue;
        }
        let (np, nq) = (ds.relevant(i).len() as f64, ds.irrelevant(i).len() as f64);
        let scale = sq * sq / (np * np * nq * nq);
        for &p in ds.relevant(i) {
            a[p] += nq;
            b[p] += nq * scale;
        }
        for &q in ds.irrelevant(i) {
            a[q] += np;
            b[q] += np * scale;
        }
    }
    (a, b)
}

fn assemble(ds: &Dataset, row_sq_norms: &[f64], data_fro2: f64, reg: f64, lambda2: f64) -> LipschitzBound {
    let (a, b) = ranking_constants(ds, row_sq_norms);
    let max_ab = a.iter().zip(&b).map(|(x, y)| x * y).fold(0.0, f64::max);
    let max_a = a.iter().copied().fold(0.0, f64::max);
    let max_b = b.iter().copied().fold(0.0, f64::max);
    let l_fr_columnwise = max_ab.sqrt();
    let l_fr = (2.0 * max_ab + 2.0 * max_a * max_b).sqrt();
    let combine = |lfr: f64| {
        (3.0 * data_fro2 * data_fro2 + 3.0 * reg * reg + 3.0 * (lambda2 * lfr).powi(2)).sqrt()
    };
    LipschitzBound {
        l_f: combine(l_fr),
        l_fr,
        l_fr_columnwise,
        l_f_columnwise: combine(l_fr_columnwise),
        per_label_a: a,
        per_label_b: b,
    }
}

/// Bound for the weight-space gradient. `ds` must be the (bias-augmented)
/// training data the weights act on.
pub fn lipschitz_linear(ds: &Dataset, hp: &HyperParams) -> LipschitzBound {
    let sq: Vec<f64> = ds
        .features()
        .outer_iter()
        .map(|r| r.dot(&r))
        .collect();
    let fro2: f64 = sq.iter().sum();
    assemble(ds, &sq, fro2, hp.lambda1, hp.lambda2)
}

/// Bound for the coefficient-space gradient with Gram matrix `k`.
pub fn lipschitz_kernel(k: ArrayView2<f64>, ds: &Dataset, hp: &HyperParams) -> Result<LipschitzBound> {
    let k = checked_gram(k, ds)?;
    Ok(lipschitz_from_gram(&k, ds, hp))
}

pub(crate) fn lipschitz_from_gram(k: &Array2<f64>, ds: &Dataset, hp: &HyperParams) -> LipschitzBound {
    let sq: Vec<f64> = k.columns().into_iter().map(|c| c.dot(&c)).collect();
    let fro2: f64 = sq.iter().sum();
    assemble(ds, &sq, fro2, hp.lambda1 * fro2.sqrt(), hp.lambda2)
}
