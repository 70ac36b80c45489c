//! Scenario files: one TOML document describing the grid, the layers and
//! their couplings, the trial schedule, and the run settings.
//!
//! Loading is fail-closed: every invariant of every constructed type is
//! checked before anything reaches the orchestrator, and semantic errors
//! name the section and the violated constraint. Parse errors carry the
//! line/column from the TOML parser.

use fieldplan_core::{
    CouplingEdge, FieldGrid, FieldSpec, GaussianBump, KernelParams, MemoryBinding, MemorySpec,
    ModelError, ModelSpec, OscillatorParams, RunSettings, ScheduledInput, SigmoidParams,
    TargetMode, TrialSpec,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{origin}: cannot read scenario: {source}")]
    Read {
        origin: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}: parse error: {source}")]
    Parse {
        origin: String,
        #[source]
        source: Box<toml::de::Error>,
    },

    #[error("{origin}: unsupported schema_version {found} (this build reads {supported})")]
    SchemaVersion {
        origin: String,
        found: u32,
        supported: u32,
    },

    #[error("{origin}: {context}: {source}")]
    Invalid {
        origin: String,
        context: String,
        #[source]
        source: ModelError,
    },

    #[error("{origin}: {message}")]
    Semantic { origin: String, message: String },
}

// --- serde mirror of the file format -------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema_version: u32,
    pub grid: GridSection,
    pub fields: BTreeMap<String, FieldSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub memories: BTreeMap<String, MemorySection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<GatesSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub response_weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<OscillatorSection>,
    pub run: RunSection,
    pub trials: Vec<TrialSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub c_excite: f64,
    pub sigma_excite: f64,
    pub c_inhibit: f64,
    pub sigma_inhibit: f64,
    pub c_global: f64,
}

impl From<KernelSection> for KernelParams {
    fn from(k: KernelSection) -> Self {
        KernelParams {
            c_excite: k.c_excite,
            sigma_excite: k.sigma_excite,
            c_inhibit: k.c_inhibit,
            sigma_inhibit: k.sigma_inhibit,
            c_global: k.c_global,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmoidSection {
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub tau: f64,
    pub h: f64,
    #[serde(default)]
    pub q: f64,
    pub kernel: KernelSection,
    pub sigmoid: SigmoidSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySection {
    /// Planning field this layer records; the sigmoid is inherited from it.
    pub source: String,
    pub tau_mem: f64,
    pub tau_decay: f64,
    pub kernel: KernelSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSection {
    pub source: String,
    pub target: String,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatesSection {
    pub fields: Vec<String>,
    #[serde(default)]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    pub k_stiffness: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub x0: f64,
}

fn default_mode() -> String {
    "plateau-constant".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_field: Option<String>,
    #[serde(default)]
    pub record_history: bool,
    #[serde(default = "default_true")]
    pub write_trajectories: bool,
    #[serde(default = "default_std_tol")]
    pub std_tol: f64,
}

fn default_true() -> bool {
    true
}

fn default_std_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSection {
    pub label: String,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub field: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub t_on: f64,
    pub t_off: f64,
}

// --- assembled output ------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorConfig {
    pub params: OscillatorParams,
    pub mode: TargetMode,
    pub x0: f64,
}

#[derive(Debug)]
pub struct LoadedScenario {
    pub doc: ScenarioDoc,
    pub grid: FieldGrid,
    pub model: ModelSpec,
    pub trials: Vec<TrialSpec>,
    pub run: RunSettings,
    pub write_trajectories: bool,
    pub oscillator: Option<OscillatorConfig>,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read {
        origin: origin.clone(),
        source,
    })?;
    load_scenario_str(&text, &origin)
}

pub fn load_scenario_str(text: &str, origin: &str) -> Result<LoadedScenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|source| ScenarioError::Parse {
        origin: origin.to_string(),
        source: Box::new(source),
    })?;
    build(doc, origin)
}

fn invalid(origin: &str, context: impl Into<String>, source: ModelError) -> ScenarioError {
    ScenarioError::Invalid {
        origin: origin.to_string(),
        context: context.into(),
        source,
    }
}

fn semantic(origin: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic {
        origin: origin.to_string(),
        message: message.into(),
    }
}

pub fn build(doc: ScenarioDoc, origin: &str) -> Result<LoadedScenario, ScenarioError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::SchemaVersion {
            origin: origin.to_string(),
            found: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }

    let grid = FieldGrid::new(doc.grid.x_min, doc.grid.x_max, doc.grid.n_points)
        .map_err(|e| invalid(origin, "grid", e))?;

    let mut model = ModelSpec::default();
    for (name, f) in &doc.fields {
        let spec = FieldSpec {
            tau: f.tau,
            h: f.h,
            q: f.q,
            kernel: f.kernel.clone().into(),
            sigmoid: SigmoidParams {
                beta: f.sigmoid.beta,
                alpha: f.sigmoid.alpha,
            },
        };
        spec.validate()
            .map_err(|e| invalid(origin, format!("fields.{name}"), e))?;
        model.fields.insert(name.clone(), spec);
    }

    for (name, m) in &doc.memories {
        let source_field = m.source.clone();
        let sigmoid = model
            .fields
            .get(&source_field)
            .map(|f| f.sigmoid)
            .ok_or_else(|| {
                invalid(
                    origin,
                    format!("memories.{name}"),
                    ModelError::UnknownMemorySource {
                        name: name.clone(),
                        source_field: source_field.clone(),
                    },
                )
            })?;
        let spec = MemorySpec::new(m.tau_mem, m.tau_decay, m.kernel.clone().into(), sigmoid)
            .map_err(|e| invalid(origin, format!("memories.{name}"), e))?;
        model
            .memories
            .insert(name.clone(), MemoryBinding { spec, source_field });
    }

    for e in &doc.edges {
        model.edges.push(CouplingEdge {
            source: e.source.clone(),
            target: e.target.clone(),
            strength: e.strength,
        });
    }

    if let Some(gates) = &doc.gates {
        for f in &gates.fields {
            model.gated_fields.insert(f.clone(), gates.margin);
        }
    }
    model.response_weights = doc.response_weights.clone();

    model.validate().map_err(|e| invalid(origin, "model", e))?;

    let measure_field = match &doc.run.measure_field {
        Some(name) => {
            if !model.fields.contains_key(name) {
                return Err(invalid(
                    origin,
                    "run.measure_field",
                    ModelError::UnknownField(name.clone()),
                ));
            }
            name.clone()
        }
        None if model.fields.len() == 1 => model.fields.keys().next().unwrap().clone(),
        None if model.fields.contains_key("planning") => "planning".to_string(),
        None => {
            return Err(semantic(
                origin,
                "run.measure_field is required when the model has several fields \
                 and none is called `planning`",
            ))
        }
    };

    let mut trials = Vec::with_capacity(doc.trials.len());
    for t in &doc.trials {
        let inputs: Vec<ScheduledInput> = t
            .inputs
            .iter()
            .map(|i| ScheduledInput {
                bump: GaussianBump {
                    amplitude: i.amplitude,
                    center: i.center,
                    width: i.width,
                },
                t_on: i.t_on,
                t_off: i.t_off,
                target_field: i.field.clone(),
            })
            .collect();
        let measure_window = match t.measure_window {
            Some([lo, hi]) => (lo, hi),
            None => default_measure_window(&inputs, &measure_field, t.duration),
        };
        let trial = TrialSpec {
            label: t.label.clone(),
            inputs,
            duration: t.duration,
            measure_window,
        };
        trial
            .validate(&model)
            .map_err(|e| invalid(origin, format!("trials.{}", t.label), e))?;
        trials.push(trial);
    }
    if trials.is_empty() {
        return Err(semantic(origin, "at least one trial is required"));
    }

    let mut run = RunSettings::new(doc.run.dt, doc.run.seed, measure_field)
        .map_err(|e| invalid(origin, "run.dt", e))?;
    run.record_history = doc.run.record_history;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well
    if !(doc.run.std_tol > 0.0) {
        return Err(semantic(origin, "run.std_tol must be > 0"));
    }
    run.std_tol = doc.run.std_tol;

    let oscillator = match &doc.oscillator {
        Some(o) => {
            let params = OscillatorParams::critically_damped(o.k_stiffness)
                .map_err(|e| invalid(origin, "oscillator.k_stiffness", e))?;
            let mode = match o.mode.as_str() {
                "plateau-constant" => TargetMode::PlateauConstant,
                "time-varying" => TargetMode::TimeVarying,
                other => {
                    return Err(semantic(
                        origin,
                        format!(
                            "oscillator.mode must be `plateau-constant` or `time-varying`, \
                             got `{other}`"
                        ),
                    ))
                }
            };
            Some(OscillatorConfig {
                params,
                mode,
                x0: o.x0,
            })
        }
        None => None,
    };

    Ok(LoadedScenario {
        doc,
        grid,
        model,
        trials,
        run,
        write_trajectories: false,
        oscillator,
    }
    .with_trajectories_flag())
}

impl LoadedScenario {
    fn with_trajectories_flag(mut self) -> Self {
        self.write_trajectories = self.doc.run.write_trajectories;
        self
    }
}

/// Final 20% of the response window: of all inputs driving the measured
/// field, take the one that ends last; with no such input, the final 20%
/// of the trial.
fn default_measure_window(
    inputs: &[ScheduledInput],
    measure_field: &str,
    duration: f64,
) -> (f64, f64) {
    let response = inputs
        .iter()
        .filter(|i| i.target_field == measure_field)
        .max_by(|a, b| a.t_off.partial_cmp(&b.t_off).expect("finite window"));
    match response {
        Some(r) => {
            let hi = r.t_off.min(duration);
            (hi - 0.2 * (hi - r.t_on), hi)
        }
        None => (0.8 * duration, duration),
    }
}
