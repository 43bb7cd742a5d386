//! Trained models and their predictions.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{append_ones, sign};
use crate::error::{Error, Result};
use crate::kernel::{cross_gram, KernelSpec};

/// Weight matrix `W` of shape `(m + 1) × l`; the last row is the bias, paired
/// with a constant trailing feature appended at fit and predict time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Array2<f64>,
}

impl LinearModel {
    /// Feature width expected from callers, before the bias column is appended.
    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn n_labels(&self) -> usize {
        self.weights.ncols()
    }
}

/// Coefficients `A` (`n × l`) over the retained training instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub coefficients: Array2<f64>,
    pub kernel: KernelSpec,
    pub train_features: Array2<f64>,
}

impl KernelModel {
    pub fn n_features(&self) -> usize {
        self.train_features.ncols()
    }

    pub fn n_labels(&self) -> usize {
        self.coefficients.ncols()
    }
}

/// Real-valued label scores, one row per test instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionScores {
    pub scores: Array2<f64>,
}

/// Thresholded labels in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPredictions {
    pub labels: Array2<f64>,
}

impl LabelPredictions {
    /// Thresholds at zero with `sign(0) = -1`.
    pub fn from_scores(scores: &PredictionScores) -> Self {
        LabelPredictions {
            labels: scores.scores.mapv(sign),
        }
    }
}

pub trait Predictor {
    fn n_features(&self) -> usize;

    fn scores(&self, x: ArrayView2<f64>) -> Result<PredictionScores>;

    fn predict(&self, x: ArrayView2<f64>) -> Result<(PredictionScores, LabelPredictions)> {
        let scores = self.scores(x)?;
        let labels = LabelPredictions::from_scores(&scores);
        Ok((scores, labels))
    }
}

fn check_width(expected: usize, x: ArrayView2<f64>) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::ShapeMismatch(format!(
            "model expects {expected} features, input has {}",
            x.ncols()
        )));
    }
    Ok(())
}

impl Predictor for LinearModel {
    fn n_features(&self) -> usize {
        LinearModel::n_features(self)
    }

    fn scores(&self, x: ArrayView2<f64>) -> Result<PredictionScores> {
        check_width(self.n_features(), x)?;
        Ok(PredictionScores {
            scores: append_ones(x).dot(&self.weights),
        })
    }
}

impl Predictor for KernelModel {
    fn n_features(&self) -> usize {
        KernelModel::n_features(self)
    }

    /// `F = K_tᵀ A` with `K_t` the train/test cross Gram matrix.
    fn scores(&self, x: ArrayView2<f64>) -> Result<PredictionScores> {
        check_width(self.n_features(), x)?;
        let kt = cross_gram(&self.kernel, self.train_features.view(), x)?;
        Ok(PredictionScores {
            scores: kt.t().dot(&self.coefficients),
        })
    }
}
