//! Kernel functions and Gram matrices.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `k(x, z) = <x, z>`
    Linear,
    /// `k(x, z) = exp(-gamma * |x - z|^2)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    /// RBF kernel with `gamma = 1 / m`, `m` being the raw feature count.
    pub fn rbf_default(n_features: usize) -> Self {
        KernelSpec::Rbf {
            gamma: 1.0 / n_features.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma.is_finite() && gamma > 0.0) => Err(
                Error::InvalidHyperParams(format!("rbf gamma must be positive, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        match *self {
            KernelSpec::Linear => x.dot(&z),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// `K_ij = k(x_i, x_j)` over the rows of `x`.
pub fn gram(spec: &KernelSpec, x: ArrayView2<f64>) -> Array2<f64> {
    if let KernelSpec::Linear = spec {
        return x.dot(&x.t());
    }
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = spec.eval(x.row(i), x.row(i));
        for j in 0..i {
            let v = spec.eval(x.row(i), x.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// `n × n_t` matrix whose column `t` is `[k(x_1, x_t), ..., k(x_n, x_t)]`.
pub fn cross_gram(
    spec: &KernelSpec,
    train: ArrayView2<f64>,
    test: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    if train.ncols() != test.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "training rows have {} features, test rows have {}",
            train.ncols(),
            test.ncols()
        )));
    }
    if let KernelSpec::Linear = spec {
        return Ok(train.dot(&test.t()));
    }
    Ok(Array2::from_shape_fn((train.nrows(), test.nrows()), |(i, t)| {
        spec.eval(train.row(i), test.row(t))
    }))
}

/// Relative symmetry tolerance for Gram matrices: `max|K - Kᵀ| <= 1e-8 * max|K|`.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Checks that `k` is square and symmetric within tolerance and returns `(K + Kᵀ) / 2`.
pub fn symmetrized(k: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (r, c) = k.dim();
    if r != c {
        return Err(Error::ShapeMismatch(format!("kernel matrix is {r}x{c}")));
    }
    let scale = k.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut asym = 0.0_f64;
    for i in 0..r {
        for j in 0..i {
            asym = asym.max((k[[i, j]] - k[[j, i]]).abs());
        }
    }
    let tolerance = SYMMETRY_TOL * scale;
    if asym > tolerance || asym.is_nan() {
        return Err(Error::AsymmetricKernel {
            max_asymmetry: asym,
            tolerance,
        });
    }
    Ok((&k + &k.t()) * 0.5)
}
