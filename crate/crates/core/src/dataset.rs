//! Training data: a dense feature matrix and a sign label matrix.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `+1` when `x > 0`, `-1` otherwise (so `sign(0) == -1`).
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// A multi-label dataset with `n` instances, `m` features and `l` labels.
///
/// Labels are stored as `-1.0` / `+1.0`. The per-row relevant and irrelevant
/// label index sets are computed once on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array2<f64>,
    relevant: Vec<Vec<usize>>,
    irrelevant: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    features: Array2<f64>,
    labels: Array2<f64>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        Dataset::new(raw.features, raw.labels)
    }
}

impl From<Dataset> for RawDataset {
    fn from(ds: Dataset) -> Self {
        RawDataset {
            features: ds.features,
            labels: ds.labels,
        }
    }
}

/// Checks every dataset invariant on raw parts.
///
/// Errors name the first offending entry and list every offending row.
pub fn validate_dataset(features: ArrayView2<f64>, labels: ArrayView2<f64>) -> Result<()> {
    let (n, m) = features.dim();
    let l = labels.ncols();
    if n == 0 || m == 0 || l == 0 || labels.nrows() == 0 {
        return Err(Error::EmptyDataset {
            rows: n,
            features: m,
            labels: l,
        });
    }
    if labels.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows but {} label rows",
            n,
            labels.nrows()
        )));
    }

    let mut first = None;
    let mut rows = Vec::new();
    for (i, row) in labels.outer_iter().enumerate() {
        if let Some((j, &v)) = row.iter().enumerate().find(|(_, &v)| v != 1.0 && v != -1.0) {
            first.get_or_insert((i, j, v));
            rows.push(i);
        }
    }
    if let Some((row, label, value)) = first {
        return Err(Error::BadLabelValue {
            row,
            label,
            value,
            rows,
        });
    }

    let mut first = None;
    for (i, row) in features.outer_iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            first.get_or_insert((i, j));
            rows.push(i);
        }
    }
    if let Some((row, column)) = first {
        return Err(Error::NonFiniteFeature { row, column, rows });
    }
    Ok(())
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Array2<f64>) -> Result<Self> {
        validate_dataset(features.view(), labels.view())?;
        Ok(Self::new_unchecked(features, labels))
    }

    fn new_unchecked(features: Array2<f64>, labels: Array2<f64>) -> Self {
        let mut relevant = Vec::with_capacity(labels.nrows());
        let mut irrelevant = Vec::with_capacity(labels.nrows());
        for row in labels.outer_iter() {
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..row.len()).partition(|&j| row[j] > 0.0);
            relevant.push(pos);
            irrelevant.push(neg);
        }
        Dataset {
            features,
            labels,
            relevant,
            irrelevant,
        }
    }

    pub fn n_instances(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array2<f64> {
        &self.labels
    }

    /// Relevant label indices `{j : y_ij = +1}` of row `i`.
    pub fn relevant(&self, i: usize) -> &[usize] {
        &self.relevant[i]
    }

    /// Irrelevant label indices `{j : y_ij = -1}` of row `i`.
    pub fn irrelevant(&self, i: usize) -> &[usize] {
        &self.irrelevant[i]
    }

    /// Whether row `i` has at least one relevant and one irrelevant label,
    /// i.e. whether it contributes to the pairwise ranking term.
    pub fn is_ranking_usable(&self, i: usize) -> bool {
        !self.relevant[i].is_empty() && !self.irrelevant[i].is_empty()
    }

    /// Number of rows skipped by the ranking term (all labels relevant or all irrelevant).
    pub fn skipped_ranking_rows(&self) -> usize {
        (0..self.n_instances())
            .filter(|&i| !self.is_ranking_usable(i))
            .count()
    }

    /// Sub-dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), rows),
            labels: self.labels.select(Axis(0), rows),
            relevant: rows.iter().map(|&i| self.relevant[i].clone()).collect(),
            irrelevant: rows.iter().map(|&i| self.irrelevant[i].clone()).collect(),
        }
    }

    /// Same labels, different features (same row count, finite entries).
    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        validate_dataset(features.view(), self.labels.view())?;
        Ok(Dataset {
            features,
            labels: self.labels.clone(),
            relevant: self.relevant.clone(),
            irrelevant: self.irrelevant.clone(),
        })
    }
}

/// Appends a constant `1` feature to every instance so the bias is absorbed
/// into the weight matrix.
pub fn augment_bias(ds: &Dataset) -> Dataset {
    Dataset {
        features: append_ones(ds.features.view()),
        labels: ds.labels.clone(),
        relevant: ds.relevant.clone(),
        irrelevant: ds.irrelevant.clone(),
    }
}

pub(crate) fn append_ones(x: ArrayView2<f64>) -> Array2<f64> {
    let ones = Array2::<f64>::ones((x.nrows(), 1));
    concatenate![Axis(1), x, ones]
}
