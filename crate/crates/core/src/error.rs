use thiserror::Error;

/// Validation failures raised while constructing grids, specs, or model
/// topology. Everything here is checked eagerly, before a simulation starts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("grid bounds must satisfy x_min < x_max, got x_min={x_min}, x_max={x_max}")]
    InvalidGridBounds { x_min: f64, x_max: f64 },

    #[error("grid needs at least 3 points, got {0}")]
    GridTooSmall(usize),

    #[error("sigma_{which} must be > 0, got {value}")]
    NonPositiveSigma { which: &'static str, value: f64 },

    #[error("c_{which} must be >= 0, got {value}")]
    NegativeAmplitude { which: &'static str, value: f64 },

    #[error("sigmoid slope beta must be > 0, got {0}")]
    NonPositiveBeta(f64),

    #[error("{which} must be > 0, got {value}")]
    NonPositiveTimescale { which: &'static str, value: f64 },

    #[error("noise coefficient q must be >= 0, got {0}")]
    NegativeNoise(f64),

    #[error("input width must be > 0, got {0}")]
    NonPositiveWidth(f64),

    #[error("input window must satisfy t_on < t_off, got t_on={t_on}, t_off={t_off}")]
    EmptyInputWindow { t_on: f64, t_off: f64 },

    #[error("tau_decay ({tau_decay}) must exceed tau_mem ({tau_mem})")]
    MemoryTimescaleOrder { tau_mem: f64, tau_decay: f64 },

    #[error("memory tau_mem ({tau_mem}) must exceed the source field's tau ({field_tau})")]
    MemoryFasterThanField { tau_mem: f64, field_tau: f64 },

    #[error("memory `{name}` must share the sigmoid of its source field `{source_field}`")]
    MemorySigmoidMismatch { name: String, source_field: String },

    #[error("vector length {got} does not match the grid ({expected} points)")]
    LengthMismatch { expected: usize, got: usize },

    #[error("kernel row length {got} does not match 2*n_points - 1 = {expected}")]
    KernelRowLength { expected: usize, got: usize },

    #[error("model has no fields")]
    NoFields,

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("coupling edge references unknown source `{0}`")]
    UnknownSource(String),

    #[error("coupling edge targets `{0}`, which is not a standard field")]
    EdgeTargetNotField(String),

    #[error("coupling edge {0} -> {0} is a self-loop")]
    SelfLoop(String),

    #[error("field-to-field coupling contains a cycle through `{0}`")]
    CyclicCoupling(String),

    #[error("identifier `{0}` names both a field and a memory")]
    DuplicateIdentifier(String),

    #[error("memory `{name}` sources unknown field `{source_field}`")]
    UnknownMemorySource { name: String, source_field: String },

    #[error("gated field `{0}` does not exist")]
    UnknownGatedField(String),

    #[error("clamp margin must be finite and >= 0, got {0}")]
    InvalidClampMargin(f64),

    #[error("response weight for `{field}` must be finite, got {value}")]
    InvalidResponseWeight { field: String, value: f64 },

    #[error("stiffness k must be > 0, got {0}")]
    NonPositiveStiffness(f64),

    #[error("trial `{label}`: {what} window [{lo}, {hi}] falls outside [0, {duration}]")]
    WindowOutsideTrial { label: String, what: &'static str, lo: f64, hi: f64, duration: f64 },

    #[error("trial `{label}`: duration must be > 0, got {duration}")]
    NonPositiveDuration { label: String, duration: f64 },

    #[error("step size dt must be > 0, got {0}")]
    NonPositiveDt(f64),

    #[error("no state available for coupling source `{0}`")]
    MissingSourceState(String),
}

/// Plateau extraction failures. The two cases are reported distinctly so a
/// caller can tell "nothing above threshold" apart from "peak still moving".
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlateauError {
    #[error("no valid peak samples in window [{lo}, {hi}]")]
    NoValidSamples { lo: f64, hi: f64 },

    #[error("peak positions do not form a plateau: std {std} >= tolerance {tol}")]
    NotAPlateau { std: f64, tol: f64 },
}

/// Runtime aborts during integration.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(
        "non-finite activation at site {site} after step to t={t}; dt is likely too large"
    )]
    NonFinite { site: usize, t: f64 },

    #[error("non-finite oscillator state at t={t}; dt is likely too large")]
    OscillatorNonFinite { t: f64 },

    #[error("trial `{label}` aborted at step {step}, layer `{layer}`: {source}")]
    Trial {
        label: String,
        step: usize,
        layer: String,
        #[source]
        source: Box<SimError>,
    },

    #[error(transparent)]
    Plateau(#[from] PlateauError),

    #[error(transparent)]
    Model(#[from] ModelError),
}
