//! Multi-label classification by joint squared-hinge binary relevance and
//! pairwise ranking losses with a trace-norm penalty on the weight matrix.
//!
//! The model is trained by an accelerated proximal gradient loop, either
//! directly on the features (linear model) or on a Gram matrix (kernel model).
//! The crate also carries the evaluation metrics, dataset readers, split and
//! cross-validation helpers, and the benchmark harness used by the `rbrl` CLI.
//!
//! ```
//! use ndarray::array;
//! use rbrl::{fit_linear, Dataset, HyperParams, Predictor};
//!
//! let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
//! let y = array![[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]];
//! let ds = Dataset::new(x.clone(), y).unwrap();
//!
//! let (model, trace) = fit_linear(&ds, &HyperParams::linear(1e-2, 1e-2, 1e-2)).unwrap();
//! assert!(trace.final_objective() <= trace.initial_objective);
//!
//! let (_scores, labels) = model.predict(x.view()).unwrap();
//! assert_eq!(labels.labels.dim(), (3, 2));
//! ```

pub mod data;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod lowrank;
pub mod metrics;
pub mod model;
pub mod model_io;
pub mod objective;
pub mod params;
pub mod solver;
pub mod tune;

pub use dataset::{augment_bias, sign, validate_dataset, Dataset};
pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use metrics::{evaluate_all, EvalReport, Metric};
pub use model::{KernelModel, LabelPredictions, LinearModel, PredictionScores, Predictor};
pub use params::HyperParams;
pub use solver::{fit_kernel, fit_linear, SolveTrace, StopReason};
