//! Multi-label evaluation metrics.
//!
//! Three classification metrics work on thresholded labels (Hamming loss,
//! subset accuracy, example-based F1) and three ranking metrics work on raw
//! scores (ranking loss, coverage, average precision).
//!
//! Conventions:
//! * in the ranking loss a tie between a relevant and an irrelevant label
//!   counts as a mis-ordered pair;
//! * label ranks (coverage, average precision) sort by descending score,
//!   ties broken by ascending label index;
//! * a row with no true and no predicted positives scores F1 = 1;
//! * rows a ranking metric cannot score (no relevant labels, or for the
//!   ranking loss no irrelevant ones either) are left out of its mean.

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::sign;
use crate::error::{Error, Result};

fn check_shapes(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "predictions are {:?}, ground truth is {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() {
        return Err(Error::ShapeMismatch("empty prediction matrix".into()));
    }
    Ok(())
}

pub fn hamming_loss(predicted: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(predicted, truth)?;
    let wrong = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(h, y)| (**h > 0.0) != (**y > 0.0))
        .count();
    Ok(wrong as f64 / predicted.len() as f64)
}

pub fn subset_accuracy(predicted: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(predicted, truth)?;
    let exact = predicted
        .outer_iter()
        .zip(truth.outer_iter())
        .filter(|(h, y)| h.iter().zip(y.iter()).all(|(a, b)| (*a > 0.0) == (*b > 0.0)))
        .count();
    Ok(exact as f64 / predicted.nrows() as f64)
}

pub fn f1_example(predicted: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(predicted, truth)?;
    let mut total = 0.0;
    for (h, y) in predicted.outer_iter().zip(truth.outer_iter()) {
        let (mut both, mut npred, mut ntrue) = (0usize, 0usize, 0usize);
        for (&a, &b) in h.iter().zip(y.iter()) {
            npred += (a > 0.0) as usize;
            ntrue += (b > 0.0) as usize;
            both += (a > 0.0 && b > 0.0) as usize;
        }
        total += if npred + ntrue == 0 {
            1.0
        } else {
            2.0 * both as f64 / (npred + ntrue) as f64
        };
    }
    Ok(total / predicted.nrows() as f64)
}

/// 1-based rank of every label, highest score first, ties to the lower index.
pub fn label_ranks(scores: ArrayView1<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // partial_cmp, not total_cmp: -0.0 and 0.0 must tie
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0; scores.len()];
    for (r, &j) in order.iter().enumerate() {
        ranks[j] = r + 1;
    }
    ranks
}

fn relevant_of(y: ArrayView1<f64>) -> (Vec<usize>, Vec<usize>) {
    (0..y.len()).partition(|&j| y[j] > 0.0)
}

pub fn ranking_loss(scores: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let (mut total, mut rows) = (0.0, 0usize);
    for (f, y) in scores.outer_iter().zip(truth.outer_iter()) {
        let (pos, neg) = relevant_of(y);
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let bad = pos
            .iter()
            .flat_map(|&p| neg.iter().map(move |&q| (p, q)))
            .filter(|&(p, q)| f[p] <= f[q])
            .count();
        total += bad as f64 / (pos.len() * neg.len()) as f64;
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::NoUsableRows {
            metric: "ranking loss",
        });
    }
    Ok(total / rows as f64)
}

/// Coverage normalized by the label count: `(mean max relevant rank - 1) / l`.
pub fn coverage(scores: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let (mut total, mut rows) = (0.0, 0usize);
    for (f, y) in scores.outer_iter().zip(truth.outer_iter()) {
        let ranks = label_ranks(f);
        let deepest = (0..y.len()).filter(|&j| y[j] > 0.0).map(|j| ranks[j]).max();
        if let Some(r) = deepest {
            total += r as f64;
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::NoUsableRows { metric: "coverage" });
    }
    Ok((total / rows as f64 - 1.0) / scores.ncols() as f64)
}

pub fn average_precision(scores: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let (mut total, mut rows) = (0.0, 0usize);
    for (f, y) in scores.outer_iter().zip(truth.outer_iter()) {
        let ranks = label_ranks(f);
        let mut pos_ranks: Vec<usize> = (0..y.len()).filter(|&j| y[j] > 0.0).map(|j| ranks[j]).collect();
        if pos_ranks.is_empty() {
            continue;
        }
        // after sorting, the k-th relevant rank has exactly k relevant labels at or above it
        pos_ranks.sort_unstable();
        let sum: f64 = pos_ranks
            .iter()
            .enumerate()
            .map(|(k, &r)| (k + 1) as f64 / r as f64)
            .sum();
        total += sum / pos_ranks.len() as f64;
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::NoUsableRows {
            metric: "average precision",
        });
    }
    Ok(total / rows as f64)
}

/// The six metric values of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub hamming_loss: f64,
    pub subset_accuracy: f64,
    pub f1_example: f64,
    pub ranking_loss: f64,
    pub coverage: f64,
    pub average_precision: f64,
}

impl EvalReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::HammingLoss => self.hamming_loss,
            Metric::SubsetAccuracy => self.subset_accuracy,
            Metric::F1Example => self.f1_example,
            Metric::RankingLoss => self.ranking_loss,
            Metric::Coverage => self.coverage,
            Metric::AveragePrecision => self.average_precision,
        }
    }

    pub fn values(&self) -> [f64; 6] {
        Metric::ALL.map(|m| self.get(m))
    }

    pub fn from_values(v: [f64; 6]) -> Self {
        EvalReport {
            hamming_loss: v[0],
            subset_accuracy: v[1],
            f1_example: v[2],
            ranking_loss: v[3],
            coverage: v[4],
            average_precision: v[5],
        }
    }
}

/// Rows each ranking metric leaves out of its mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRows {
    /// Rows with no relevant or no irrelevant label.
    pub ranking_loss: usize,
    /// Rows with no relevant label; shared by coverage and average precision.
    pub coverage: usize,
    pub average_precision: usize,
}

pub fn skipped_rows(truth: ArrayView2<f64>) -> SkippedRows {
    let (mut no_pos, mut one_sided) = (0, 0);
    for y in truth.outer_iter() {
        let (pos, neg) = relevant_of(y);
        no_pos += usize::from(pos.is_empty());
        one_sided += usize::from(pos.is_empty() || neg.is_empty());
    }
    SkippedRows {
        ranking_loss: one_sided,
        coverage: no_pos,
        average_precision: no_pos,
    }
}

/// All six metrics. `labels` must be the zero-thresholded `scores`.
pub fn evaluate_all(
    scores: ArrayView2<f64>,
    labels: ArrayView2<f64>,
    truth: ArrayView2<f64>,
) -> Result<EvalReport> {
    check_shapes(scores, labels)?;
    check_shapes(scores, truth)?;
    if let Some(((row, label), _)) = scores
        .indexed_iter()
        .find(|((i, j), &f)| sign(f) != labels[[*i, *j]])
    {
        return Err(Error::InconsistentPredictions { row, label });
    }
    Ok(EvalReport {
        hamming_loss: hamming_loss(labels, truth)?,
        subset_accuracy: subset_accuracy(labels, truth)?,
        f1_example: f1_example(labels, truth)?,
        ranking_loss: ranking_loss(scores, truth)?,
        coverage: coverage(scores, truth)?,
        average_precision: average_precision(scores, truth)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    HammingLoss,
    SubsetAccuracy,
    F1Example,
    RankingLoss,
    Coverage,
    AveragePrecision,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::HammingLoss,
        Metric::SubsetAccuracy,
        Metric::F1Example,
        Metric::RankingLoss,
        Metric::Coverage,
        Metric::AveragePrecision,
    ];

    pub fn higher_is_better(self) -> bool {
        matches!(
            self,
            Metric::SubsetAccuracy | Metric::F1Example | Metric::AveragePrecision
        )
    }

    /// Short column name used in CSV output.
    pub fn short_name(self) -> &'static str {
        match self {
            Metric::HammingLoss => "hal",
            Metric::SubsetAccuracy => "sa",
            Metric::F1Example => "f1e",
            Metric::RankingLoss => "ral",
            Metric::Coverage => "cov",
            Metric::AveragePrecision => "ap",
        }
    }

    /// This metric for `scores`, thresholding at zero where labels are needed.
    pub fn compute(self, scores: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
        let labels = || scores.mapv(sign);
        match self {
            Metric::HammingLoss => hamming_loss(labels().view(), truth),
            Metric::SubsetAccuracy => subset_accuracy(labels().view(), truth),
            Metric::F1Example => f1_example(labels().view(), truth),
            Metric::RankingLoss => ranking_loss(scores, truth),
            Metric::Coverage => coverage(scores, truth),
            Metric::AveragePrecision => average_precision(scores, truth),
        }
    }

    /// `true` when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        Metric::ALL
            .into_iter()
            .find(|m| {
                m.short_name() == norm
                    || serde_json::to_value(m).ok().and_then(|v| v.as_str().map(|x| x == norm)) == Some(true)
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric {s:?}")))
    }
}

/// Mean and sample standard deviation of each metric over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: EvalReport,
    pub std: EvalReport,
    pub runs: usize,
}

pub fn summarize(reports: &[EvalReport]) -> Option<MetricSummary> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let mut mean = [0.0; 6];
    for r in reports {
        for (acc, v) in mean.iter_mut().zip(r.values()) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut var = [0.0; 6];
    if reports.len() > 1 {
        for r in reports {
            for ((acc, v), m) in var.iter_mut().zip(r.values()).zip(mean) {
                *acc += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).sqrt());
    }
    Some(MetricSummary {
        mean: EvalReport::from_values(mean),
        std: EvalReport::from_values(var),
        runs: reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn signed_zeros_tie() {
        assert_eq!(label_ranks(array![0.0, -0.0, 1.0].view()), vec![2, 3, 1]);
        assert_eq!(label_ranks(array![-0.0, 0.0, 1.0].view()), vec![2, 3, 1]);
    }

    #[test]
    fn hamming_examples() {
        let y = array![[1.0, -1.0, 1.0], [-1.0, -1.0, 1.0]];
        assert_eq!(hamming_loss(y.view(), y.view()).unwrap(), 0.0);
        assert_eq!(hamming_loss((-&y).view(), y.view()).unwrap(), 1.0);
        let mut h = y.clone();
        h[[1, 0]] = 1.0;
        assert_abs_diff_eq!(hamming_loss(h.view(), y.view()).unwrap(), 1.0 / 6.0);
    }

    #[test]
    fn subset_accuracy_examples() {
        let y = array![[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [-1.0, -1.0]];
        assert_eq!(subset_accuracy(y.view(), y.view()).unwrap(), 1.0);
        assert_eq!(subset_accuracy((-&y).view(), y.view()).unwrap(), 0.0);
        let mut h = -&y;
        h.row_mut(2).assign(&y.row(2));
        assert_eq!(subset_accuracy(h.view(), y.view()).unwrap(), 0.25);
    }

    #[test]
    fn f1_examples() {
        let y = array![[1.0, -1.0], [1.0, 1.0]];
        assert_eq!(f1_example(y.view(), y.view()).unwrap(), 1.0);
        let disjoint = f1_example(array![[-1.0, 1.0]].view(), array![[1.0, -1.0]].view()).unwrap();
        assert_eq!(disjoint, 0.0);
        let half = f1_example(array![[-1.0, 1.0, 1.0]].view(), array![[1.0, 1.0, -1.0]].view()).unwrap();
        assert_eq!(half, 0.5);
        let empty = f1_example(array![[-1.0, -1.0]].view(), array![[-1.0, -1.0]].view()).unwrap();
        assert_eq!(empty, 1.0);
    }

    #[test]
    fn ranking_loss_examples() {
        let y = array![[1.0, -1.0, -1.0]];
        assert_eq!(ranking_loss(array![[3.0, 1.0, 2.0]].view(), y.view()).unwrap(), 0.0);
        assert_eq!(ranking_loss(array![[1.0, 1.0]].view(), array![[1.0, -1.0]].view()).unwrap(), 1.0);
        assert_eq!(ranking_loss(array![[2.0, 3.0, 1.0]].view(), y.view()).unwrap(), 0.5);
        assert!(matches!(
            ranking_loss(array![[1.0, 2.0]].view(), array![[1.0, 1.0]].view()),
            Err(Error::NoUsableRows { .. })
        ));
    }

    #[test]
    fn coverage_examples() {
        let f = array![[4.0, 3.0, 2.0, 1.0]];
        assert_eq!(coverage(f.view(), array![[1.0, -1.0, -1.0, -1.0]].view()).unwrap(), 0.0);
        assert_eq!(coverage(f.view(), array![[1.0, -1.0, 1.0, -1.0]].view()).unwrap(), 0.5);
        assert_eq!(coverage(f.view(), array![[-1.0, -1.0, -1.0, 1.0]].view()).unwrap(), 0.75);
        assert!(coverage(f.view(), array![[-1.0, -1.0, -1.0, -1.0]].view()).is_err());
    }

    #[test]
    fn average_precision_examples() {
        let f = array![[4.0, 3.0, 2.0, 1.0]];
        assert_eq!(average_precision(f.view(), array![[1.0, 1.0, -1.0, -1.0]].view()).unwrap(), 1.0);
        assert_abs_diff_eq!(
            average_precision(f.view(), array![[1.0, -1.0, 1.0, -1.0]].view()).unwrap(),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        assert_eq!(average_precision(f.view(), array![[-1.0, -1.0, -1.0, 1.0]].view()).unwrap(), 0.25);
    }

    #[test]
    fn ties_rank_by_label_index() {
        assert_eq!(label_ranks(array![1.0, 1.0, 2.0, 1.0].view()), vec![2, 3, 1, 4]);
    }

    #[test]
    fn perfect_predictions() {
        let y = array![[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]];
        let r = evaluate_all(y.view(), y.view(), y.view()).unwrap();
        assert_eq!(r.values(), [0.0, 1.0, 1.0, 0.0, r.coverage, 1.0]);
        // coverage is minimal: deepest relevant rank equals the number of relevant labels
        assert_abs_diff_eq!(r.coverage, ((2.0 + 1.0) / 2.0 - 1.0) / 3.0);
    }

    #[test]
    fn inconsistent_labels_are_rejected() {
        let f = array![[0.5, 0.0]];
        let h = array![[1.0, 1.0]];
        assert!(matches!(
            evaluate_all(f.view(), h.view(), h.view()),
            Err(Error::InconsistentPredictions { row: 0, label: 1 })
        ));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.short_name().parse::<Metric>().unwrap(), m);
        }
        assert_eq!("average_precision".parse::<Metric>().unwrap(), Metric::AveragePrecision);
        assert!("auc".parse::<Metric>().is_err());
    }

    #[test]
    fn summary_statistics() {
        let a = EvalReport::from_values([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let b = EvalReport::from_values([0.3, 0.2, 0.3, 0.4, 0.5, 0.8]);
        let s = summarize(&[a, b]).unwrap();
        assert_abs_diff_eq!(s.mean.hamming_loss, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.std.hamming_loss, 0.02f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.std.subset_accuracy, 0.0);
        assert_eq!(summarize(&[a]).unwrap().std, EvalReport::from_values([0.0; 6]));
        assert!(summarize(&[]).is_none());
    }

    #[test]
    fn skipped_row_counts() {
        let y = array![[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
        let k = skipped_rows(y.view());
        assert_eq!((k.ranking_loss, k.coverage, k.average_precision), (2, 1, 1));
    }
}
