use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Iteration cap used for linear fits unless overridden.
pub const DEFAULT_LINEAR_MAX_ITERS: usize = 1000;
/// Iteration cap used for kernel fits unless overridden.
pub const DEFAULT_KERNEL_MAX_ITERS: usize = 3000;
/// Default relative objective-change stopping threshold.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Trade-off weights and solver settings for one fit.
///
/// * `lambda1` weights the squared Frobenius norm (`Tr(AᵀKA)` for kernels),
/// * `lambda2` weights the pairwise ranking term,
/// * `lambda3` weights the trace norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub kernel: KernelSpec,
    /// Keep the previous iterate whenever the proximal step would raise the
    /// objective, making the recorded trace non-increasing. Off by default.
    #[serde(default)]
    pub monotone: bool,
}

impl HyperParams {
    pub fn linear(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        HyperParams {
            lambda1,
            lambda2,
            lambda3,
            max_iters: DEFAULT_LINEAR_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
            kernel: KernelSpec::Linear,
            monotone: false,
        }
    }

    pub fn kernel(lambda1: f64, lambda2: f64, lambda3: f64, kernel: KernelSpec) -> Self {
        HyperParams {
            max_iters: DEFAULT_KERNEL_MAX_ITERS,
            kernel,
            ..Self::linear(lambda1, lambda2, lambda3)
        }
    }

    pub fn with_lambdas(self, lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        HyperParams {
            lambda1,
            lambda2,
            lambda3,
            ..self
        }
    }

    pub fn with_max_iters(self, max_iters: usize) -> Self {
        HyperParams { max_iters, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        HyperParams { rel_tol, ..self }
    }

    pub fn with_monotone(self, monotone: bool) -> Self {
        HyperParams { monotone, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidHyperParams(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidHyperParams("max_iters must be positive".into()));
        }
        self.kernel.validate()
    }
}
