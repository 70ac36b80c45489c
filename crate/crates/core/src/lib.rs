//! Simulation engine for coupled one-dimensional dynamic neural fields with
//! a task-dynamic readout.
//!
//! A model is a set of activation fields over a shared metric dimension.
//! Each field relaxes toward a resting level, integrates scheduled Gaussian
//! inputs and weighted coupling from other layers, and interacts with itself
//! through a Mexican-hat kernel gated by a sigmoid threshold — enough for
//! localized activation peaks to form, self-stabilize, and compete. On top
//! of the standard fields sit slower Hebbian memory layers that accumulate
//! smoothed traces of above-threshold activation, and a latched gate that
//! keeps coupled drive from triggering a production field until a direct
//! response input arrives. The position of the winning peak drives a
//! critically damped oscillator toward its target.
//!
//! The [`orchestrator`] module runs trial sequences with cross-trial memory
//! carry-over and extracts the per-trial metrics (plateau peak position,
//! threshold-crossing onset, tract-variable trajectories). Everything is
//! deterministic for a fixed seed.

// Validations use `!(x > 0.0)` so that NaN fails them too; the suggested
// `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolution;
pub mod coupling;
pub mod error;
pub mod field;
pub mod grid;
pub mod inputs;
pub mod kernel;
pub mod memory;
pub mod noise;
pub mod orchestrator;
pub mod taskdyn;

pub use convolution::{lateral_interaction_direct, Convolver};
pub use coupling::{
    apply_gate, gate_update, CouplingEdge, GateState, LayerStates, MemoryBinding, ModelSpec,
};
pub use error::{ModelError, PlateauError, SimError};
pub use field::{field_step, FieldSpec, FieldState};
pub use grid::FieldGrid;
pub use inputs::{evaluate_inputs, evaluate_inputs_into, GaussianBump, ScheduledInput};
pub use kernel::{kernel_row, mexican_hat, sigmoid, sigmoid_scalar, KernelParams, SigmoidParams};
pub use memory::{memory_step, MemorySpec, MemoryState};
pub use noise::NoiseSource;
pub use orchestrator::{
    run_experiment, run_trial, simulate_tract_variable, threshold_onset, ActivationHistory,
    ExperimentDerived, ExperimentResult, Model, RunSettings, TrialResult, TrialSpec,
};
pub use taskdyn::{
    extract_target, oscillator_step, plateau_target, refine_peak_parabolic, OscillatorParams,
    OscillatorState, TargetMode, TargetTrace,
};
