//! Interaction kernel and the sigmoid that gates it.
//!
//! The kernel has a "Mexican hat" shape: a narrow excitatory Gaussian minus a
//! wider inhibitory Gaussian minus a constant global-inhibition floor.
//! Amplitudes are scaled as `c / sqrt(2*pi*sigma)` — sigma under the square
//! root, not squared. That is the convention this crate is built around and
//! it is deliberately not the standard Gaussian density normalization; peak
//! height falls off as sigma^(-1/2) when a kernel is widened at fixed c.

use crate::error::ModelError;
use crate::grid::FieldGrid;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub c_excite: f64,
    pub sigma_excite: f64,
    pub c_inhibit: f64,
    pub sigma_inhibit: f64,
    pub c_global: f64,
}

impl KernelParams {
    /// A kernel that contributes nothing; useful for isolating the intrinsic
    /// field dynamics.
    pub fn zero() -> Self {
        Self {
            c_excite: 0.0,
            sigma_excite: 1.0,
            c_inhibit: 0.0,
            sigma_inhibit: 1.0,
            c_global: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma_excite > 0.0) {
            return Err(ModelError::NonPositiveSigma {
                which: "excite",
                value: self.sigma_excite,
            });
        }
        if !(self.sigma_inhibit > 0.0) {
            return Err(ModelError::NonPositiveSigma {
                which: "inhibit",
                value: self.sigma_inhibit,
            });
        }
        if !(self.c_excite >= 0.0) {
            return Err(ModelError::NegativeAmplitude {
                which: "excite",
                value: self.c_excite,
            });
        }
        if !(self.c_inhibit >= 0.0) {
            return Err(ModelError::NegativeAmplitude {
                which: "inhibit",
                value: self.c_inhibit,
            });
        }
        if !(self.c_global >= 0.0) {
            return Err(ModelError::NegativeAmplitude {
                which: "global",
                value: self.c_global,
            });
        }
        Ok(())
    }
}

/// Evaluate the kernel at the given offsets.
pub fn mexican_hat(offsets: &[f64], params: &KernelParams) -> Vec<f64> {
    let exc_amp = params.c_excite / (2.0 * PI * params.sigma_excite).sqrt();
    let inh_amp = params.c_inhibit / (2.0 * PI * params.sigma_inhibit).sqrt();
    let exc_var2 = 2.0 * params.sigma_excite * params.sigma_excite;
    let inh_var2 = 2.0 * params.sigma_inhibit * params.sigma_inhibit;
    offsets
        .iter()
        .map(|&d| {
            let d2 = d * d;
            exc_amp * (-d2 / exc_var2).exp() - inh_amp * (-d2 / inh_var2).exp() - params.c_global
        })
        .collect()
}

/// Kernel sampled on all grid offsets; precomputed once per field and reused
/// every step. Length `2 * n_points - 1`.
pub fn kernel_row(grid: &FieldGrid, params: &KernelParams) -> Vec<f64> {
    mexican_hat(&grid.offsets(), params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidParams {
    /// Slope of the threshold function.
    pub beta: f64,
    /// Threshold; sites must exceed it to contribute to interactions.
    pub alpha: f64,
}

impl SigmoidParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.beta > 0.0) {
            return Err(ModelError::NonPositiveBeta(self.beta));
        }
        Ok(())
    }
}

/// Logistic threshold `1 / (1 + exp(-beta * (u - alpha)))`.
///
/// Saturates cleanly at 0 and 1 for large |u|; `exp` overflow on the negative
/// side yields +inf and a 0 output rather than NaN.
#[inline]
pub fn sigmoid_scalar(u: f64, params: &SigmoidParams) -> f64 {
    1.0 / (1.0 + (-params.beta * (u - params.alpha)).exp())
}

pub fn sigmoid(u: &[f64], params: &SigmoidParams) -> Vec<f64> {
    u.iter().map(|&v| sigmoid_scalar(v, params)).collect()
}

pub fn sigmoid_into(u: &[f64], params: &SigmoidParams, out: &mut [f64]) {
    debug_assert_eq!(u.len(), out.len());
    for (o, &v) in out.iter_mut().zip(u) {
        *o = sigmoid_scalar(v, params);
    }
}
