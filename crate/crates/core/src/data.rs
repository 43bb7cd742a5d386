//! Dataset files and the train/test and cross-validation splits.
//!
//! Two text formats are read (UTF-8, LF or CRLF line endings):
//!
//! **dense-csv**
//!
//! ```text
//! #mll n=<n> m=<m> l=<l>
//! <x_1>,...,<x_m>,<y_1>,...,<y_l>
//! ```
//!
//! One line per instance, `m` feature floats then `l` label tokens from
//! `{0, 1, -1, +1}` (`0` and `-1` mean irrelevant). The row count must equal `n`.
//!
//! **sparse-mll**
//!
//! ```text
//! [#mll n=<n> m=<m> l=<l>]
//! <lbl>,<lbl>,...|<idx>:<val> <idx>:<val> ...
//! ```
//!
//! Labels listed before `|` are the relevant ones; labels and feature indices
//! are 1-based and absent features are 0. The header line is optional; without
//! it `m` and `l` are the largest indices seen.
//!
//! [`write_dataset`] always emits dense-csv with labels written as `-1` / `+1`
//! and features in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    DenseCsv,
    SparseMll,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" | "csv" => Ok(DataFormat::DenseCsv),
            "sparse-mll" | "mll" => Ok(DataFormat::SparseMll),
            other => Err(Error::InvalidConfig(format!("unknown data format {other:?}"))),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, format)
}

pub fn parse_dataset(text: &str, format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::DenseCsv => parse_dense_csv(text),
        DataFormat::SparseMll => parse_sparse_mll(text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    n: usize,
    m: usize,
    l: usize,
}

fn parse_header(line: &str, line_no: usize) -> Result<Header> {
    let err = |column: usize, message: String| Error::Parse {
        line: line_no,
        column,
        message,
    };
    let mut fields = line.split_whitespace();
    if fields.next() != Some("#mll") {
        return Err(err(1, "expected header `#mll n=<n> m=<m> l=<l>`".into()));
    }
    let (mut n, mut m, mut l) = (None, None, None);
    for (k, field) in fields.enumerate() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(k + 2, format!("expected key=value, got {field:?}")))?;
        let value: usize = value
            .parse()
            .map_err(|_| err(k + 2, format!("invalid count {value:?}")))?;
        match key {
            "n" => n = Some(value),
            "m" => m = Some(value),
            "l" => l = Some(value),
            _ => return Err(err(k + 2, format!("unknown header key {key:?}"))),
        }
    }
    match (n, m, l) {
        (Some(n), Some(m), Some(l)) => Ok(Header { n, m, l }),
        _ => Err(err(1, "header must define n, m and l".into())),
    }
}

fn parse_label_token(token: &str, line: usize) -> Result<f64> {
    match token {
        "1" | "+1" => Ok(1.0),
        "0" | "-1" => Ok(-1.0),
        _ => Err(Error::LabelOutOfRange {
            line,
            token: token.to_string(),
        }),
    }
}

fn parse_float(token: &str, line: usize, column: usize) -> Result<f64> {
    token.parse::<f64>().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("invalid number {token:?}"),
    })
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_dense_csv(text: &str) -> Result<Dataset> {
    let mut lines = content_lines(text);
    let (hline, htext) = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing header".into(),
    })?;
    let Header { n, m, l } = parse_header(htext, hline)?;
    let width = m + l;

    let mut features = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n * l);
    let mut rows = 0;
    let mut last_line = hline;
    for (line_no, line) in lines {
        last_line = line_no;
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != width {
            return Err(Error::InconsistentWidth {
                line: line_no,
                expected: width,
                found: tokens.len(),
            });
        }
        for (c, t) in tokens[..m].iter().enumerate() {
            features.push(parse_float(t, line_no, c + 1)?);
        }
        for t in &tokens[m..] {
            labels.push(parse_label_token(t, line_no)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: last_line,
            column: 1,
            message: format!("header declares {n} rows, found {rows}"),
        });
    }
    let features = Array2::from_shape_vec((n, m), features).expect("row-major buffer");
    let labels = Array2::from_shape_vec((n, l), labels).expect("row-major buffer");
    Dataset::new(features, labels)
}

type SparseRow = (Vec<usize>, Vec<(usize, f64)>);

pub fn parse_sparse_mll(text: &str) -> Result<Dataset> {
    let mut lines = content_lines(text).peekable();
    let header = match lines.peek() {
        Some(&(no, line)) if line.trim_start().starts_with('#') => {
            lines.next();
            Some(parse_header(line.trim(), no)?)
        }
        _ => None,
    };

    let mut rows: Vec<SparseRow> = Vec::new();
    let (mut max_m, mut max_l) = (0usize, 0usize);
    let mut last_line = 0;
    for (line_no, line) in lines {
        last_line = line_no;
        let (label_part, feature_part) = line.split_once('|').ok_or_else(|| Error::Parse {
            line: line_no,
            column: 1,
            message: "missing `|` between labels and features".into(),
        })?;

        let mut relevant = Vec::new();
        for (c, tok) in label_part.split(',').map(str::trim).enumerate() {
            if tok.is_empty() {
                if label_part.trim().is_empty() {
                    break;
                }
                return Err(Error::Parse {
                    line: line_no,
                    column: c + 1,
                    message: "empty label index".into(),
                });
            }
            let idx: usize = tok.parse().map_err(|_| Error::LabelOutOfRange {
                line: line_no,
                token: tok.to_string(),
            })?;
            if idx == 0 || header.is_some_and(|h| idx > h.l) {
                return Err(Error::LabelOutOfRange {
                    line: line_no,
                    token: tok.to_string(),
                });
            }
            max_l = max_l.max(idx);
            relevant.push(idx - 1);
        }

        let mut feats = Vec::new();
        for (c, tok) in feature_part.split_whitespace().enumerate() {
            let bad = |message: String| Error::Parse {
                line: line_no,
                column: c + 1,
                message,
            };
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| bad(format!("expected <idx>:<val>, got {tok:?}")))?;
            let idx: usize = i
                .parse()
                .map_err(|_| bad(format!("invalid feature index {i:?}")))?;
            if idx == 0 || header.is_some_and(|h| idx > h.m) {
                return Err(bad(format!("feature index {idx} out of range")));
            }
            max_m = max_m.max(idx);
            feats.push((idx - 1, parse_float(v, line_no, c + 1)?));
        }
        rows.push((relevant, feats));
    }

    let (m, l) = match header {
        Some(h) => {
            if h.n != rows.len() {
                return Err(Error::Parse {
                    line: last_line.max(1),
                    column: 1,
                    message: format!("header declares {} rows, found {}", h.n, rows.len()),
                });
            }
            (h.m, h.l)
        }
        None => (max_m, max_l),
    };
    let n = rows.len();
    let mut features = Array2::zeros((n, m));
    let mut labels = Array2::from_elem((n, l), -1.0);
    for (i, (relevant, feats)) in rows.into_iter().enumerate() {
        for j in relevant {
            labels[[i, j]] = 1.0;
        }
        for (j, v) in feats {
            features[[i, j]] = v;
        }
    }
    Dataset::new(features, labels)
}

/// Canonical dense-csv text for `ds`.
pub fn dense_csv_string(ds: &Dataset) -> String {
    let (n, m, l) = (ds.n_instances(), ds.n_features(), ds.n_labels());
    let mut out = format!("#mll n={n} m={m} l={l}\n");
    for (x, y) in ds.features().outer_iter().zip(ds.labels().outer_iter()) {
        let mut first = true;
        for v in x.iter() {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v:?}").expect("writing to a String");
        }
        for v in y.iter() {
            out.push_str(if *v > 0.0 { ",+1" } else { ",-1" });
        }
        out.push('\n');
    }
    out
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dense_csv_string(ds))?;
    Ok(())
}

/// Repeated random train/test splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_fraction: f64,
    pub repeats: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            seed: 0,
            train_fraction: 0.6,
            repeats: 10,
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be positive".into()));
        }
        Ok(())
    }

    /// Training rows for `n` instances: `ceil(fraction * n)`, capped at `n`.
    pub fn train_size(&self, n: usize) -> usize {
        // the small offset keeps e.g. 0.7 * 10 = 7.000000000000001 from rounding up to 8
        let raw = (self.train_fraction * n as f64 - 1e-9).ceil();
        (raw.max(0.0) as usize).min(n)
    }
}

/// Uniform integer in `0..bound` by rejection sampling, so results do not
/// depend on any library's range-sampling algorithm.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Fisher-Yates permutation of `0..n` driven by ChaCha8 with the given seed and stream.
pub fn permutation(n: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        idx.swap(i, j);
    }
    idx
}

/// Row indices `(train, test)` of split `repeat_index`.
pub fn split_indices(n: usize, plan: &SplitPlan, repeat_index: usize) -> (Vec<usize>, Vec<usize>) {
    let perm = permutation(n, plan.seed, repeat_index as u64);
    let cut = plan.train_size(n);
    (perm[..cut].to_vec(), perm[cut..].to_vec())
}

/// Train/test split number `repeat_index` of `plan`.
pub fn split(ds: &Dataset, plan: &SplitPlan, repeat_index: usize) -> Result<(Dataset, Dataset)> {
    plan.validate()?;
    if repeat_index >= plan.repeats {
        return Err(Error::InvalidConfig(format!(
            "repeat index {repeat_index} out of range for {} repeats",
            plan.repeats
        )));
    }
    let (train, test) = split_indices(ds.n_instances(), plan, repeat_index);
    if train.is_empty() || test.is_empty() {
        return Err(Error::TooFewRows {
            rows: ds.n_instances(),
            folds: 2,
        });
    }
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Stream reserved for fold assignment, distinct from every split stream.
const FOLD_STREAM: u64 = u64::MAX;

/// Validation row indices of each of `k` folds. The first `n % k` folds hold one extra row.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::TooFewRows { rows: n, folds: k });
    }
    let perm = permutation(n, seed, FOLD_STREAM);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// `(train, validation)` datasets for each of `k` folds.
pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    let n = ds.n_instances();
    let folds = kfold_indices(n, k, seed)?;
    let mut assignment = vec![0; n];
    for (f, rows) in folds.iter().enumerate() {
        for &i in rows {
            assignment[i] = f;
        }
    }
    Ok(folds
        .iter()
        .enumerate()
        .map(|(f, val)| {
            let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
            (ds.select_rows(&train), ds.select_rows(val))
        })
        .collect())
}
