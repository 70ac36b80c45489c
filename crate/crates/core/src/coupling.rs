//! Multi-field assembly: weighted directed couplings between layers, the
//! response-input weighting, and the latched production gate.
//!
//! The gate exists so that coupled drive (perception, memory) can shape a
//! field's sub-threshold landscape but cannot push it over threshold on its
//! own. It opens the moment a direct response input arrives, holds while the
//! field stays above threshold after the input ends, and closes otherwise;
//! while closed, the field is clamped to `alpha - margin` after each step.

use crate::error::ModelError;
use crate::field::FieldSpec;
use crate::memory::MemorySpec;
use std::collections::{BTreeMap, BTreeSet};

/// Directed coupling: the target field receives `strength * u_source` as
/// drive. Sources may be standard fields or memory layers; targets must be
/// standard fields. The raw source activation couples in, not its sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEdge {
    pub source: String,
    pub target: String,
    pub strength: f64,
}

/// Latched production gate for one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateState {
    /// Gamma: true = 1 (open), false = 0 (clamped).
    pub open: bool,
    /// True while the gate is open purely because activation is holding it
    /// (input gone, field still above threshold).
    pub latched: bool,
}

impl GateState {
    pub fn closed() -> Self {
        Self::default()
    }

    pub fn gamma(&self) -> f64 {
        if self.open {
            1.0
        } else {
            0.0
        }
    }
}

/// Advance the gate. Cases are evaluated in priority order: a live response
/// input forces the gate open; otherwise above-threshold activation holds the
/// previous value; otherwise the gate closes.
///
/// `input_active` must reflect the *response input* to this field only
/// (weighted input positive anywhere), never coupled drive — a gate that
/// listened to coupling would defeat its own purpose.
pub fn gate_update(gate: GateState, input_active: bool, field_u: &[f64], alpha: f64) -> GateState {
    if input_active {
        GateState {
            open: true,
            latched: false,
        }
    } else if field_u.iter().any(|&u| u > alpha) {
        GateState {
            open: gate.open,
            latched: gate.open,
        }
    } else {
        GateState::closed()
    }
}

/// Clamp a closed-gated field to `alpha - margin`; an open gate passes the
/// activation through untouched.
pub fn apply_gate(gate: GateState, u: &mut [f64], alpha: f64, margin: f64) {
    if gate.open {
        return;
    }
    let cap = alpha - margin;
    for v in u.iter_mut() {
        if *v > cap {
            *v = cap;
        }
    }
}

/// Memory layer plus the field whose activation it records.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBinding {
    pub spec: MemorySpec,
    pub source_field: String,
}

/// Borrowed view of every layer's current activation, keyed by identifier.
#[derive(Debug, Default)]
pub struct LayerStates<'a> {
    pub fields: BTreeMap<&'a str, &'a [f64]>,
    pub memories: BTreeMap<&'a str, &'a [f64]>,
}

impl<'a> LayerStates<'a> {
    fn lookup(&self, id: &str) -> Option<&'a [f64]> {
        self.fields
            .get(id)
            .or_else(|| self.memories.get(id))
            .copied()
    }
}

/// Declarative description of a multi-layer model. Validation is eager and
/// complete: a `ModelSpec` that passes `validate` can always be compiled
/// into a runnable simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpec {
    pub fields: BTreeMap<String, FieldSpec>,
    pub memories: BTreeMap<String, MemoryBinding>,
    pub edges: Vec<CouplingEdge>,
    /// Gated fields and their clamp margins.
    pub gated_fields: BTreeMap<String, f64>,
    /// Weight applied to scheduled inputs per field; absent means 1.
    pub response_weights: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn response_weight(&self, field: &str) -> f64 {
        self.response_weights.get(field).copied().unwrap_or(1.0)
    }

    pub fn clamp_margin(&self, field: &str) -> Option<f64> {
        self.gated_fields.get(field).copied()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.fields.is_empty() {
            return Err(ModelError::NoFields);
        }
        for spec in self.fields.values() {
            spec.validate()?;
        }
        for (name, binding) in &self.memories {
            binding.spec.validate()?;
            if self.fields.contains_key(name) {
                return Err(ModelError::DuplicateIdentifier(name.clone()));
            }
            let source = self.fields.get(&binding.source_field).ok_or_else(|| {
                ModelError::UnknownMemorySource {
                    name: name.clone(),
                    source_field: binding.source_field.clone(),
                }
            })?;
            if binding.spec.sigmoid != source.sigmoid {
                return Err(ModelError::MemorySigmoidMismatch {
                    name: name.clone(),
                    source_field: binding.source_field.clone(),
                });
            }
            if !(binding.spec.tau_mem > source.tau) {
                return Err(ModelError::MemoryFasterThanField {
                    tau_mem: binding.spec.tau_mem,
                    field_tau: source.tau,
                });
            }
        }
        for edge in &self.edges {
            if !self.fields.contains_key(&edge.target) {
                return Err(ModelError::EdgeTargetNotField(edge.target.clone()));
            }
            if !self.fields.contains_key(&edge.source) && !self.memories.contains_key(&edge.source)
            {
                return Err(ModelError::UnknownSource(edge.source.clone()));
            }
            if edge.source == edge.target {
                return Err(ModelError::SelfLoop(edge.source.clone()));
            }
        }
        self.check_field_acyclicity()?;
        for (name, margin) in &self.gated_fields {
            if !self.fields.contains_key(name) {
                return Err(ModelError::UnknownGatedField(name.clone()));
            }
            if !margin.is_finite() || *margin < 0.0 {
                return Err(ModelError::InvalidClampMargin(*margin));
            }
        }
        for (name, w) in &self.response_weights {
            if !self.fields.contains_key(name) {
                return Err(ModelError::UnknownField(name.clone()));
            }
            if !w.is_finite() {
                return Err(ModelError::InvalidResponseWeight {
                    field: name.clone(),
                    value: *w,
                });
            }
        }
        Ok(())
    }

    /// Field-to-field coupling must be acyclic; memory loops are exempt —
    /// a field feeding a memory that couples back into it is the point of
    /// the architecture.
    fn check_field_acyclicity(&self) -> Result<(), ModelError> {
        let mut visiting = BTreeSet::new();
        let mut done = BTreeSet::new();
        for start in self.fields.keys() {
            self.dfs_fields(start, &mut visiting, &mut done)?;
        }
        Ok(())
    }

    fn dfs_fields<'a>(
        &'a self,
        node: &'a str,
        visiting: &mut BTreeSet<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<(), ModelError> {
        if done.contains(node) {
            return Ok(());
        }
        if !visiting.insert(node) {
            return Err(ModelError::CyclicCoupling(node.to_string()));
        }
        for edge in self.edges.iter().filter(|e| e.source == node) {
            if self.fields.contains_key(&edge.target) {
                self.dfs_fields(&edge.target, visiting, done)?;
            }
        }
        visiting.remove(node);
        done.insert(node);
        Ok(())
    }

    /// Assemble the non-intrinsic drive for one field: the weighted response
    /// input plus every incoming coupling term, all read from states at the
    /// same time step.
    pub fn compose_drive(
        &self,
        field_id: &str,
        states: &LayerStates<'_>,
        raw_input: Option<&[f64]>,
        out: &mut [f64],
    ) -> Result<(), ModelError> {
        if !self.fields.contains_key(field_id) {
            return Err(ModelError::UnknownField(field_id.to_string()));
        }
        match raw_input {
            Some(input) => {
                let w = self.response_weight(field_id);
                for (o, &s) in out.iter_mut().zip(input) {
                    *o = w * s;
                }
            }
            None => out.fill(0.0),
        }
        for edge in self.edges.iter().filter(|e| e.target == field_id) {
            let src = states
                .lookup(&edge.source)
                .ok_or_else(|| ModelError::MissingSourceState(edge.source.clone()))?;
            for (o, &u) in out.iter_mut().zip(src) {
                *o += edge.strength * u;
            }
        }
        Ok(())
    }
}
