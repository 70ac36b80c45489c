//! One integration step of the generic field equation.
//!
//! The field relaxes toward its resting level `h` at rate `1/tau`, driven by
//! external input and by the sigmoid-gated lateral interaction:
//!
//! ```text
//! u += (dt/tau) * (-u + h + drive + interaction) + (q*sqrt(dt)/tau) * xi
//! ```
//!
//! with `xi` i.i.d. standard normal per site (Euler–Maruyama scaling, so the
//! per-unit-time noise variance does not depend on dt). A non-finite result
//! at any site aborts the run instead of clamping; that always indicates a
//! step size too large for the chosen parameters.

use crate::convolution::Convolver;
use crate::error::{ModelError, SimError};
use crate::grid::FieldGrid;
use crate::kernel::{KernelParams, SigmoidParams};
use crate::noise::NoiseSource;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    /// Relaxation time constant.
    pub tau: f64,
    /// Resting level; sub-threshold by convention (negative in practice).
    pub h: f64,
    /// Noise coefficient; 0 disables noise entirely (no RNG draws).
    pub q: f64,
    pub kernel: KernelParams,
    pub sigmoid: SigmoidParams,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.tau > 0.0) {
            return Err(ModelError::NonPositiveTimescale {
                which: "tau",
                value: self.tau,
            });
        }
        if !(self.q >= 0.0) {
            return Err(ModelError::NegativeNoise(self.q));
        }
        self.kernel.validate()?;
        self.sigmoid.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Activation per grid site.
    pub u: Vec<f64>,
    /// Simulation time the activation refers to.
    pub t: f64,
}

impl FieldState {
    /// Field at its resting level, the start-of-trial condition.
    pub fn resting(spec: &FieldSpec, grid: &FieldGrid) -> Self {
        Self {
            u: vec![spec.h; grid.n_points()],
            t: 0.0,
        }
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Advance the field by one explicit Euler(–Maruyama) step.
///
/// `external_drive` is the sum of every input and coupling term for this
/// field at the current time; callers compose it before stepping.
pub fn field_step(
    state: &mut FieldState,
    spec: &FieldSpec,
    conv: &mut Convolver,
    external_drive: &[f64],
    dt: f64,
    noise: &mut NoiseSource,
) -> Result<(), SimError> {
    debug_assert_eq!(state.u.len(), external_drive.len());
    let lateral = conv.interaction(&state.u, &spec.sigmoid);
    let rate = dt / spec.tau;
    let h = spec.h;
    if spec.q > 0.0 {
        let amp = spec.q * dt.sqrt() / spec.tau;
        for ((u, &drive), &lat) in state.u.iter_mut().zip(external_drive).zip(lateral) {
            *u += rate * (-*u + h + drive + lat) + amp * noise.standard_normal();
        }
    } else {
        for ((u, &drive), &lat) in state.u.iter_mut().zip(external_drive).zip(lateral) {
            *u += rate * (-*u + h + drive + lat);
        }
    }
    state.t += dt;
    if let Some(site) = state.u.iter().position(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { site, t: state.t });
    }
    Ok(())
}
