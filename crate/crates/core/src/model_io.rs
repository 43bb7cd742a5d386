//! Model files.
//!
//! The binary layout (all integers and floats little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `RBRLMDL\0` |
//! | 4     | format version (`u32`, currently 1) |
//! | 1     | model kind: 0 linear, 1 kernel |
//! | 1     | kernel kind: 0 linear, 1 rbf |
//! | 8     | rbf gamma (`f64`, 0 for the linear kernel) |
//! | 8 × 3 | `rows`, `cols`, `m` as `u64` |
//! | 8 × rows × cols | parameter matrix, row-major `f64` (`W` or `A`) |
//! | 8 × rows × m    | kernel models only: training features, row-major `f64` |
//!
//! For a linear model `rows = m + 1` (bias last) and no feature block follows.
//!
//! Paths ending in `.json` use the textual form instead: a JSON object with
//! `version`, `model_kind`, `kernel`, and the matrices as nested row arrays.
//!
//! Prediction files are text: a header `#pred n=<n> l=<l>`, then one line per
//! instance with `l` scores followed by `l` labels in `{-1, +1}`, comma-separated.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{KernelModel, LabelPredictions, LinearModel, PredictionScores, Predictor};

pub const MAGIC: &[u8; 8] = b"RBRLMDL\0";
pub const FORMAT_VERSION: u32 = 1;

/// Either trained model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Kernel(KernelModel),
}

impl Model {
    pub fn n_labels(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_labels(),
            Model::Kernel(m) => m.n_labels(),
        }
    }
}

impl Predictor for Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features(),
            Model::Kernel(m) => m.n_features(),
        }
    }

    fn scores(&self, x: ndarray::ArrayView2<f64>) -> Result<PredictionScores> {
        match self {
            Model::Linear(m) => m.scores(x),
            Model::Kernel(m) => m.scores(x),
        }
    }
}

fn push_matrix(out: &mut Vec<u8>, m: &Array2<f64>) {
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let (kind, spec, params, train) = match model {
        Model::Linear(m) => (0u8, KernelSpec::Linear, &m.weights, None),
        Model::Kernel(m) => (1u8, m.kernel, &m.coefficients, Some(&m.train_features)),
    };
    let (kernel_kind, gamma) = match spec {
        KernelSpec::Linear => (0u8, 0.0),
        KernelSpec::Rbf { gamma } => (1u8, gamma),
    };
    out.push(kind);
    out.push(kernel_kind);
    out.extend_from_slice(&gamma.to_le_bytes());
    let m = match model {
        Model::Linear(lm) => lm.n_features(),
        Model::Kernel(km) => km.n_features(),
    };
    for d in [params.nrows(), params.ncols(), m] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    push_matrix(&mut out, params);
    if let Some(t) = train {
        push_matrix(&mut out, t);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::InvalidModelFile("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn dim(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::InvalidModelFile("dimension overflow".into()))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let len = rows
            .checked_mul(cols)
            .filter(|&len| len.checked_mul(8).is_some_and(|b| b <= self.bytes.len() - self.pos))
            .ok_or_else(|| Error::InvalidModelFile("matrix larger than file".into()))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(self.f64()?);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("length checked"))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::InvalidModelFile("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let kind = r.u8()?;
    let kernel_kind = r.u8()?;
    let gamma = r.f64()?;
    let (rows, cols, m) = (r.dim()?, r.dim()?, r.dim()?);
    let spec = match kernel_kind {
        0 => KernelSpec::Linear,
        1 => KernelSpec::Rbf { gamma },
        k => return Err(Error::InvalidModelFile(format!("unknown kernel kind {k}"))),
    };
    spec.validate()?;
    let model = match kind {
        0 => {
            if rows != m + 1 || spec != KernelSpec::Linear {
                return Err(Error::InvalidModelFile("inconsistent linear model header".into()));
            }
            Model::Linear(LinearModel {
                weights: r.matrix(rows, cols)?,
            })
        }
        1 => {
            let coefficients = r.matrix(rows, cols)?;
            let train_features = r.matrix(rows, m)?;
            Model::Kernel(KernelModel {
                coefficients,
                kernel: spec,
                train_features,
            })
        }
        k => return Err(Error::InvalidModelFile(format!("unknown model kind {k}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::InvalidModelFile("trailing bytes".into()));
    }
    Ok(model)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelKindTag {
    Linear,
    Kernel,
}

#[derive(Serialize, Deserialize)]
struct TextModel {
    version: u32,
    model_kind: ModelKindTag,
    kernel: KernelSpec,
    params: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train_features: Option<Vec<Vec<f64>>>,
}

fn rows_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let n = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::InvalidModelFile("ragged matrix".into()));
    }
    Ok(Array2::from_shape_vec((n, w), rows.concat()).expect("rectangular"))
}

pub fn to_json(model: &Model) -> Result<String> {
    let text = match model {
        Model::Linear(m) => TextModel {
            version: FORMAT_VERSION,
            model_kind: ModelKindTag::Linear,
            kernel: KernelSpec::Linear,
            params: rows_of(&m.weights),
            train_features: None,
        },
        Model::Kernel(m) => TextModel {
            version: FORMAT_VERSION,
            model_kind: ModelKindTag::Kernel,
            kernel: m.kernel,
            params: rows_of(&m.coefficients),
            train_features: Some(rows_of(&m.train_features)),
        },
    };
    Ok(serde_json::to_string_pretty(&text)?)
}

pub fn from_json(text: &str) -> Result<Model> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::InvalidModelFile("missing version".into()))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let t: TextModel = serde_json::from_value(value)?;
    t.kernel.validate()?;
    match t.model_kind {
        ModelKindTag::Linear => {
            if t.params.is_empty() {
                return Err(Error::InvalidModelFile("linear model without a bias row".into()));
            }
            Ok(Model::Linear(LinearModel {
                weights: from_rows(t.params)?,
            }))
        }
        ModelKindTag::Kernel => {
            let coefficients = from_rows(t.params)?;
            let train = t
                .train_features
                .ok_or_else(|| Error::InvalidModelFile("kernel model without training features".into()))?;
            let train_features = from_rows(train)?;
            if train_features.nrows() != coefficients.nrows() {
                return Err(Error::InvalidModelFile(
                    "coefficient and training-feature row counts differ".into(),
                ));
            }
            Ok(Model::Kernel(KernelModel {
                coefficients,
                kernel: t.kernel,
                train_features,
            }))
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes the binary layout, or JSON when the extension is `.json`.
pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_json(path) {
        fs::write(path, to_json(model)?)?;
    } else {
        fs::write(path, to_bytes(model))?;
    }
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    if is_json(path) {
        from_json(&fs::read_to_string(path)?)
    } else {
        from_bytes(&fs::read(path)?)
    }
}

pub fn predictions_to_string(scores: &PredictionScores, labels: &LabelPredictions) -> Result<String> {
    let (n, l) = scores.scores.dim();
    if labels.labels.dim() != (n, l) {
        return Err(Error::ShapeMismatch(format!(
            "scores are {:?}, labels are {:?}",
            scores.scores.dim(),
            labels.labels.dim()
        )));
    }
    let mut out = format!("#pred n={n} l={l}\n");
    for (s, y) in scores.scores.outer_iter().zip(labels.labels.outer_iter()) {
        let mut fields: Vec<String> = s.iter().map(|v| format!("{v:?}")).collect();
        fields.extend(y.iter().map(|&v| if v > 0.0 { "+1".to_string() } else { "-1".to_string() }));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_predictions(text: &str) -> Result<(PredictionScores, LabelPredictions)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, column: usize, message: String| Error::Parse { line, column, message };
    let (hl, header) = lines.next().ok_or_else(|| bad(1, 1, "missing header".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("#pred") {
        return Err(bad(hl, 1, "expected header `#pred n=<n> l=<l>`".into()));
    }
    let mut dims = [None, None];
    for (k, f) in fields.enumerate() {
        let parsed = f.split_once('=').and_then(|(key, v)| Some((key, v.parse::<usize>().ok()?)));
        match parsed {
            Some(("n", v)) => dims[0] = Some(v),
            Some(("l", v)) => dims[1] = Some(v),
            _ => return Err(bad(hl, k + 2, format!("invalid header field {f:?}"))),
        }
    }
    let [Some(n), Some(l)] = dims else {
        return Err(bad(hl, 1, "header must define n and l".into()));
    };
    let mut scores = Vec::with_capacity(n * l);
    let mut labels = Vec::with_capacity(n * l);
    let mut rows = 0;
    for (no, line) in lines {
        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != 2 * l {
            return Err(Error::InconsistentWidth {
                line: no,
                expected: 2 * l,
                found: tokens.len(),
            });
        }
        for (c, t) in tokens[..l].iter().enumerate() {
            scores.push(t.parse::<f64>().map_err(|_| bad(no, c + 1, format!("invalid number {t:?}")))?);
        }
        for t in &tokens[l..] {
            labels.push(match *t {
                "+1" | "1" => 1.0,
                "-1" => -1.0,
                _ => {
                    return Err(Error::LabelOutOfRange {
                        line: no,
                        token: t.to_string(),
                    })
                }
            });
        }
        rows += 1;
    }
    if rows != n {
        return Err(bad(hl, 1, format!("header declares {n} rows, found {rows}")));
    }
    Ok((
        PredictionScores {
            scores: Array2::from_shape_vec((n, l), scores).expect("row-major buffer"),
        },
        LabelPredictions {
            labels: Array2::from_shape_vec((n, l), labels).expect("row-major buffer"),
        },
    ))
}
