//! Trial and experiment execution.
//!
//! A trial resets every standard field to its resting level, keeps whatever
//! memory state it is handed, and then advances the whole model in lockstep.
//! The per-step order is fixed:
//!
//! 1. evaluate scheduled inputs at time t,
//! 2. compose every field's drive from the states at time t,
//! 3. step all fields synchronously,
//! 4. update gates (response-input activity decides, post-step activation
//!    holds),
//! 5. clamp closed-gated fields,
//! 6. step memory layers from the post-clamp source activation.
//!
//! Experiments run trials in sequence, threading memory through while fields
//! start fresh each trial — that carry-over is the only channel by which one
//! trial can influence the next.

use crate::convolution::Convolver;
use crate::coupling::{apply_gate, gate_update, GateState, LayerStates, ModelSpec};
use crate::error::{ModelError, PlateauError, SimError};
use crate::field::{field_step, FieldState};
use crate::grid::FieldGrid;
use crate::inputs::ScheduledInput;
use crate::memory::{memory_step, MemoryState};
use crate::noise::NoiseSource;
use crate::taskdyn::{
    extract_target, oscillator_step, plateau_target, refine_peak_parabolic, OscillatorParams,
    OscillatorState, TargetMode, TargetTrace,
};
use std::collections::BTreeMap;

/// One trial: a label, its scheduled inputs, how long it runs, and where the
/// plateau metric is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub label: String,
    pub inputs: Vec<ScheduledInput>,
    pub duration: f64,
    /// Window the plateau peak is averaged over; by convention the final
    /// 20% of the response window.
    pub measure_window: (f64, f64),
}

impl TrialSpec {
    pub fn validate(&self, model: &ModelSpec) -> Result<(), ModelError> {
        if !(self.duration > 0.0) {
            return Err(ModelError::NonPositiveDuration {
                label: self.label.clone(),
                duration: self.duration,
            });
        }
        for input in &self.inputs {
            input.validate()?;
            if !model.fields.contains_key(&input.target_field) {
                return Err(ModelError::UnknownField(input.target_field.clone()));
            }
            if input.t_on < 0.0 || input.t_off > self.duration {
                return Err(ModelError::WindowOutsideTrial {
                    label: self.label.clone(),
                    what: "input",
                    lo: input.t_on,
                    hi: input.t_off,
                    duration: self.duration,
                });
            }
        }
        let (lo, hi) = self.measure_window;
        if !(lo < hi) || lo < 0.0 || hi > self.duration {
            return Err(ModelError::WindowOutsideTrial {
                label: self.label.clone(),
                what: "measure",
                lo,
                hi,
                duration: self.duration,
            });
        }
        Ok(())
    }
}

/// Execution settings shared by every trial of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub dt: f64,
    pub seed: u64,
    /// Field whose peak is measured and fed to the oscillator.
    pub measure_field: String,
    /// Keep full space-time activation matrices for every layer.
    pub record_history: bool,
    /// Plateau acceptance tolerance on the std of peak positions.
    pub std_tol: f64,
    /// Parabolic sub-grid peak refinement (off: plain argmax).
    pub subgrid_refine: bool,
}

impl RunSettings {
    pub fn new(dt: f64, seed: u64, measure_field: impl Into<String>) -> Result<Self, ModelError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ModelError::NonPositiveDt(dt));
        }
        Ok(Self {
            dt,
            seed,
            measure_field: measure_field.into(),
            record_history: false,
            std_tol: 0.05,
            subgrid_refine: false,
        })
    }
}

/// Dense space-time activation record; row i is the state at t = i * dt
/// (row 0 is the initial condition).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationHistory {
    n_points: usize,
    data: Vec<f64>,
}

impl ActivationHistory {
    fn new(n_points: usize) -> Self {
        Self {
            n_points,
            data: Vec::new(),
        }
    }

    fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.n_points);
        self.data.extend_from_slice(row);
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_points
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_points..(i + 1) * self.n_points]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_points)
    }
}

/// Earliest time at which the recorded field pokes above threshold; `None`
/// if it never does. Row i of the history is t = i * dt.
pub fn threshold_onset(history: &ActivationHistory, alpha: f64, dt: f64) -> Option<f64> {
    history
        .rows()
        .position(|row| row.iter().any(|&u| u > alpha))
        .map(|i| i as f64 * dt)
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub label: String,
    /// Plateau metric: mean peak position over the measure window.
    pub peak_position: Option<f64>,
    /// Why the plateau is missing, when it is.
    pub plateau_error: Option<PlateauError>,
    /// Per-step peak-derived target (hold semantics applied).
    pub peak_trace: TargetTrace,
    /// First time the measured field exceeded threshold.
    pub threshold_onset: Option<f64>,
    /// Space-time activation per layer, when recording was requested.
    pub field_history: Option<BTreeMap<String, ActivationHistory>>,
    /// Tract-variable trajectory, attached after the field pass.
    pub tract_trajectory: Option<Vec<(f64, f64)>>,
}

/// Cross-trial summary metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDerived {
    /// Last-trial peak minus first-trial peak (zero for a single trial).
    pub baseline_to_washout_shift: Option<f64>,
    /// Baseline peak minus each interior trial's peak; positive values mean
    /// the peak moved toward smaller x than baseline.
    pub shadow_convergence: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub trials: Vec<TrialResult>,
    /// Memory state after each trial, keyed by layer name.
    pub memory_snapshots: Vec<BTreeMap<String, MemoryState>>,
    pub derived: ExperimentDerived,
}

/// A validated model compiled for stepping: per-layer convolution plans and
/// scratch buffers, built once and reused across trials.
pub struct Model {
    grid: FieldGrid,
    spec: ModelSpec,
    field_names: Vec<String>,
    field_convolvers: Vec<Convolver>,
    memory_names: Vec<String>,
    memory_convolvers: Vec<Convolver>,
    memory_sources: Vec<usize>,
    input_bufs: Vec<Vec<f64>>,
    drive_bufs: Vec<Vec<f64>>,
}

impl Model {
    pub fn new(spec: ModelSpec, grid: FieldGrid) -> Result<Self, ModelError> {
        spec.validate()?;
        let n = grid.n_points();
        let field_names: Vec<String> = spec.fields.keys().cloned().collect();
        let field_convolvers = field_names
            .iter()
            .map(|name| Convolver::new(&grid, &spec.fields[name].kernel))
            .collect::<Result<Vec<_>, _>>()?;
        let memory_names: Vec<String> = spec.memories.keys().cloned().collect();
        let memory_convolvers = memory_names
            .iter()
            .map(|name| Convolver::new(&grid, &spec.memories[name].spec.kernel))
            .collect::<Result<Vec<_>, _>>()?;
        let memory_sources = memory_names
            .iter()
            .map(|name| {
                let source = &spec.memories[name].source_field;
                field_names.iter().position(|f| f == source).expect("validated")
            })
            .collect();
        Ok(Self {
            grid,
            spec,
            input_bufs: vec![vec![0.0; n]; field_names.len()],
            drive_bufs: vec![vec![0.0; n]; field_names.len()],
            field_names,
            field_convolvers,
            memory_names,
            memory_convolvers,
            memory_sources,
        })
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn field_names(&self) -> &[String] {
        &self.field_names
    }

    pub fn memory_names(&self) -> &[String] {
        &self.memory_names
    }

    /// Fresh zeroed memory states, the starting point of an experiment.
    pub fn fresh_memory(&self) -> BTreeMap<String, MemoryState> {
        self.memory_names
            .iter()
            .map(|name| (name.clone(), MemoryState::zeros(&self.grid)))
            .collect()
    }

    fn field_index(&self, name: &str) -> Result<usize, ModelError> {
        self.field_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| ModelError::UnknownField(name.to_string()))
    }
}

/// Run one trial: fields from rest, memory carried in, metrics out.
pub fn run_trial(
    model: &mut Model,
    trial: &TrialSpec,
    carry_memory: &BTreeMap<String, MemoryState>,
    settings: &RunSettings,
    noise_stream: u64,
) -> Result<(TrialResult, BTreeMap<String, MemoryState>), SimError> {
    trial.validate(&model.spec)?;
    let measure_idx = model.field_index(&settings.measure_field)?;
    let n = model.grid.n_points();
    let dt = settings.dt;
    let n_steps = (trial.duration / dt).round() as usize;

    let field_names = model.field_names.clone();
    let memory_names = model.memory_names.clone();
    let grid = model.grid.clone();

    let wrap = |layer: &str, step: usize, e: SimError| SimError::Trial {
        label: trial.label.clone(),
        step,
        layer: layer.to_string(),
        source: Box::new(e),
    };

    // Fields reset to rest; memory is whatever the previous trial left.
    let mut field_states: Vec<FieldState> = field_names
        .iter()
        .map(|name| FieldState::resting(&model.spec.fields[name], &grid))
        .collect();
    let mut memory_states: Vec<MemoryState> = memory_names
        .iter()
        .map(|name| {
            let mut st = carry_memory
                .get(name)
                .cloned()
                .unwrap_or_else(|| MemoryState::zeros(&grid));
            st.t = 0.0;
            st
        })
        .collect();
    let mut gates: BTreeMap<usize, GateState> = model
        .spec
        .gated_fields
        .keys()
        .map(|name| (model.field_index(name).expect("validated"), GateState::closed()))
        .collect();

    let mut noise = NoiseSource::stream(settings.seed, noise_stream);

    // Input profiles are time-invariant inside their windows; sample once.
    let profiles: Vec<Vec<f64>> = trial
        .inputs
        .iter()
        .map(|inp| inp.bump.profile(&grid))
        .collect();
    let input_targets: Vec<usize> = trial
        .inputs
        .iter()
        .map(|inp| model.field_index(&inp.target_field).expect("validated"))
        .collect();

    let mut history: Option<BTreeMap<String, ActivationHistory>> =
        settings.record_history.then(|| {
            field_names
                .iter()
                .chain(memory_names.iter())
                .map(|name| (name.clone(), ActivationHistory::new(n)))
                .collect()
        });
    let record = |history: &mut Option<BTreeMap<String, ActivationHistory>>,
                  fields: &[FieldState],
                  mems: &[MemoryState]| {
        if let Some(hist) = history.as_mut() {
            for (name, state) in field_names.iter().zip(fields) {
                hist.get_mut(name).expect("layer registered").push_row(&state.u);
            }
            for (name, state) in memory_names.iter().zip(mems) {
                hist.get_mut(name)
                    .expect("layer registered")
                    .push_row(&state.u_mem);
            }
        }
    };

    let alpha_measured = model.spec.fields[&field_names[measure_idx]].sigmoid.alpha;
    let refine = settings.subgrid_refine;
    let mut trace = TargetTrace::new(TargetMode::TimeVarying);
    let mut onset: Option<f64> = None;
    let mut previous_target: Option<f64> = None;

    let sample = |trace: &mut TargetTrace,
                  previous_target: &mut Option<f64>,
                  onset: &mut Option<f64>,
                  u: &[f64],
                  t: f64| {
        let (target, valid) = extract_target(u, &grid, alpha_measured, *previous_target);
        let target = if valid && refine {
            let i_max = u
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite activation"))
                .map(|(i, _)| i)
                .expect("nonempty field");
            Some(refine_peak_parabolic(u, &grid, i_max))
        } else {
            target
        };
        *previous_target = target;
        trace.push(t, target, valid);
        if onset.is_none() && u.iter().any(|&v| v > alpha_measured) {
            *onset = Some(t);
        }
    };

    record(&mut history, &field_states, &memory_states);
    sample(
        &mut trace,
        &mut previous_target,
        &mut onset,
        &field_states[measure_idx].u,
        0.0,
    );

    for step in 0..n_steps {
        let t = step as f64 * dt;

        // (1) Scheduled inputs at time t, summed per target field.
        for buf in model.input_bufs.iter_mut() {
            buf.fill(0.0);
        }
        for ((input, profile), &target) in
            trial.inputs.iter().zip(&profiles).zip(&input_targets)
        {
            if input.active_at(t) {
                let buf = &mut model.input_bufs[target];
                for (b, &p) in buf.iter_mut().zip(profile) {
                    *b += p;
                }
            }
        }

        // (2) Drives from the states at time t.
        {
            let mut states = LayerStates::default();
            for (name, state) in field_names.iter().zip(&field_states) {
                states.fields.insert(name.as_str(), &state.u);
            }
            for (name, state) in memory_names.iter().zip(&memory_states) {
                states.memories.insert(name.as_str(), &state.u_mem);
            }
            let inputs = &model.input_bufs;
            let drives = &mut model.drive_bufs;
            for (idx, name) in field_names.iter().enumerate() {
                model
                    .spec
                    .compose_drive(name, &states, Some(&inputs[idx]), &mut drives[idx])
                    .map_err(|e| wrap(name, step, e.into()))?;
            }
        }

        // (3) Synchronous field steps.
        for (idx, name) in field_names.iter().enumerate() {
            field_step(
                &mut field_states[idx],
                &model.spec.fields[name],
                &mut model.field_convolvers[idx],
                &model.drive_bufs[idx],
                dt,
                &mut noise,
            )
            .map_err(|e| wrap(name, step, e))?;
        }

        // (4) + (5) Gates: response-input activity opens, post-step
        // activation holds, closed gates clamp.
        for (&idx, gate) in gates.iter_mut() {
            let name = &field_names[idx];
            let weight = model.spec.response_weight(name);
            let input_active = model.input_bufs[idx].iter().any(|&s| s * weight > 0.0);
            let alpha = model.spec.fields[name].sigmoid.alpha;
            let margin = model.spec.gated_fields[name];
            *gate = gate_update(*gate, input_active, &field_states[idx].u, alpha);
            apply_gate(*gate, &mut field_states[idx].u, alpha, margin);
        }

        // (6) Memory layers read the post-clamp source activation.
        for m in 0..memory_names.len() {
            let name = &memory_names[m];
            let source_u = &field_states[model.memory_sources[m]].u;
            memory_step(
                &mut memory_states[m],
                &model.spec.memories[name].spec,
                source_u,
                &mut model.memory_convolvers[m],
                dt,
            )
            .map_err(|e| wrap(name, step, e))?;
        }

        let t_next = (step + 1) as f64 * dt;
        record(&mut history, &field_states, &memory_states);
        sample(
            &mut trace,
            &mut previous_target,
            &mut onset,
            &field_states[measure_idx].u,
            t_next,
        );
    }

    let (peak_position, plateau_error) =
        match plateau_target(&trace, trial.measure_window, settings.std_tol) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        };

    let result = TrialResult {
        label: trial.label.clone(),
        peak_position,
        plateau_error,
        peak_trace: trace,
        threshold_onset: onset,
        field_history: history,
        tract_trajectory: None,
    };
    let memory_out = model
        .memory_names
        .iter()
        .cloned()
        .zip(memory_states)
        .collect();
    Ok((result, memory_out))
}

/// Run a trial schedule in order, threading memory through and resetting
/// fields each trial. The result is a pure function of (model, schedule,
/// settings): trial i always uses noise stream i.
pub fn run_experiment(
    model: &mut Model,
    schedule: &[TrialSpec],
    settings: &RunSettings,
) -> Result<ExperimentResult, SimError> {
    let mut memory = model.fresh_memory();
    let mut trials = Vec::with_capacity(schedule.len());
    let mut snapshots = Vec::with_capacity(schedule.len());
    for (i, trial) in schedule.iter().enumerate() {
        let (result, carried) = run_trial(model, trial, &memory, settings, i as u64)?;
        memory = carried;
        snapshots.push(memory.clone());
        trials.push(result);
    }

    let first_peak = trials.first().and_then(|t| t.peak_position);
    let last_peak = trials.last().and_then(|t| t.peak_position);
    let baseline_to_washout_shift = match (first_peak, last_peak) {
        (Some(b), Some(w)) => Some(w - b),
        _ => None,
    };
    let shadow_convergence = if trials.len() > 2 {
        trials[1..trials.len() - 1]
            .iter()
            .map(|t| match (first_peak, t.peak_position) {
                (Some(b), Some(p)) => Some(b - p),
                _ => None,
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(ExperimentResult {
        trials,
        memory_snapshots: snapshots,
        derived: ExperimentDerived {
            baseline_to_washout_shift,
            shadow_convergence,
        },
    })
}

/// Drive the oscillator from a finished trial's peak data.
///
/// Plateau-constant mode uses the trial's single plateau value (and errors
/// when there is none); time-varying mode follows the per-step trace, with
/// the oscillator resting until the first valid target appears.
pub fn simulate_tract_variable(
    result: &TrialResult,
    params: &OscillatorParams,
    mode: TargetMode,
    x0: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>, SimError> {
    let steps = result.peak_trace.len().saturating_sub(1);
    let mut state = OscillatorState::at_rest(x0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, state.x));
    match mode {
        TargetMode::PlateauConstant => {
            let target = result.peak_position.ok_or_else(|| {
                result
                    .plateau_error
                    .clone()
                    .map(SimError::Plateau)
                    .unwrap_or(SimError::Plateau(PlateauError::NoValidSamples {
                        lo: 0.0,
                        hi: 0.0,
                    }))
            })?;
            for i in 1..=steps {
                oscillator_step(&mut state, params, target, dt)?;
                out.push((i as f64 * dt, state.x));
            }
        }
        TargetMode::TimeVarying => {
            for i in 1..=steps {
                // Target in effect during the step [t_i-1, t_i).
                let held = result.peak_trace.values[i - 1];
                let target = if held.is_finite() { held } else { state.x };
                oscillator_step(&mut state, params, target, dt)?;
                out.push((i as f64 * dt, state.x));
            }
        }
    }
    Ok(out)
}
