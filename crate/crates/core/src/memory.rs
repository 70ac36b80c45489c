//! Hebbian memory layer coupled to a planning field.
//!
//! While the source field carries any above-threshold activation, the layer
//! relaxes (rate `1/tau_mem`) toward the smoothing-kernel convolution of the
//! thresholded source pattern — so the stored trace is a spatially broadened
//! copy of what the field did. While the source field is entirely
//! sub-threshold, the whole layer decays toward zero at the slower rate
//! `1/tau_decay`. The layer has no noise term, and the timescale ordering
//! `tau_decay > tau_mem > tau` of the source field is enforced when a model
//! is assembled.

use crate::convolution::Convolver;
use crate::error::{ModelError, SimError};
use crate::grid::FieldGrid;
use crate::kernel::{KernelParams, SigmoidParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemorySpec {
    /// Accumulation time constant (slower than the source field's tau).
    pub tau_mem: f64,
    /// Decay time constant (slowest of the three).
    pub tau_decay: f64,
    /// Local smoothing kernel; purely excitatory by convention — the trace
    /// records, it does not compete.
    pub kernel: KernelParams,
    /// Shared with the source planning field.
    pub sigmoid: SigmoidParams,
}

impl MemorySpec {
    pub fn new(
        tau_mem: f64,
        tau_decay: f64,
        kernel: KernelParams,
        sigmoid: SigmoidParams,
    ) -> Result<Self, ModelError> {
        let spec = Self {
            tau_mem,
            tau_decay,
            kernel,
            sigmoid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.tau_mem > 0.0) {
            return Err(ModelError::NonPositiveTimescale {
                which: "tau_mem",
                value: self.tau_mem,
            });
        }
        if !(self.tau_decay > 0.0) {
            return Err(ModelError::NonPositiveTimescale {
                which: "tau_decay",
                value: self.tau_decay,
            });
        }
        if !(self.tau_decay > self.tau_mem) {
            return Err(ModelError::MemoryTimescaleOrder {
                tau_mem: self.tau_mem,
                tau_decay: self.tau_decay,
            });
        }
        self.kernel.validate()?;
        self.sigmoid.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    pub u_mem: Vec<f64>,
    pub t: f64,
}

impl MemoryState {
    pub fn zeros(grid: &FieldGrid) -> Self {
        Self {
            u_mem: vec![0.0; grid.n_points()],
            t: 0.0,
        }
    }

    pub fn max(&self) -> f64 {
        self.u_mem.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Euler step of the memory dynamics given the source field's current
/// (post-gate) activation.
pub fn memory_step(
    mem: &mut MemoryState,
    spec: &MemorySpec,
    planning_u: &[f64],
    conv: &mut Convolver,
    dt: f64,
) -> Result<(), SimError> {
    debug_assert_eq!(mem.u_mem.len(), planning_u.len());
    let alpha = spec.sigmoid.alpha;
    let any_above = planning_u.iter().any(|&u| u > alpha);
    if any_above {
        let target = conv.interaction(planning_u, &spec.sigmoid);
        let accum = dt / spec.tau_mem;
        for (m, &tgt) in mem.u_mem.iter_mut().zip(target) {
            *m += accum * (-*m + tgt);
        }
    } else {
        let decay = dt / spec.tau_decay;
        for m in mem.u_mem.iter_mut() {
            *m -= decay * *m;
        }
    }
    mem.t += dt;
    if let Some(site) = mem.u_mem.iter().position(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { site, t: mem.t });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::lateral_interaction_direct;
    use crate::kernel::kernel_row;

    fn smoothing_kernel() -> KernelParams {
        KernelParams {
            c_excite: 1.0,
            sigma_excite: 1.5,
            c_inhibit: 0.0,
            sigma_inhibit: 1.0,
            c_global: 0.0,
        }
    }

    const SIG: SigmoidParams = SigmoidParams {
        beta: 4.0,
        alpha: 0.0,
    };

    fn spec() -> MemorySpec {
        MemorySpec::new(20.0, 500.0, smoothing_kernel(), SIG).unwrap()
    }

    #[test]
    fn construction_enforces_timescale_order() {
        let err = MemorySpec::new(50.0, 20.0, smoothing_kernel(), SIG);
        assert!(matches!(err, Err(ModelError::MemoryTimescaleOrder { .. })));
        assert!(MemorySpec::new(0.0, 10.0, smoothing_kernel(), SIG).is_err());
    }

    #[test]
    fn subthreshold_source_decays_exponentially() {
        let grid = FieldGrid::new(-10.0, 10.0, 51).unwrap();
        let spec = spec();
        let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
        let m0 = 0.8;
        let mut mem = MemoryState {
            u_mem: vec![m0; 51],
            t: 0.0,
        };
        let planning = vec![-5.0; 51];
        let dt = 0.05;
        let steps = 10_000; // t = 500 = tau_decay
        for _ in 0..steps {
            memory_step(&mut mem, &spec, &planning, &mut conv, dt).unwrap();
        }
        let expected = m0 * (-(steps as f64 * dt) / spec.tau_decay).exp();
        for &m in &mem.u_mem {
            // Explicit Euler bias at this dt is small; the rate is checked
            // tightly in the acceptance suite with a finer step.
            assert!((m - expected).abs() < 1e-4, "{m} vs {expected}");
        }
    }

    #[test]
    fn zero_memory_stays_zero_below_threshold() {
        let grid = FieldGrid::new(-10.0, 10.0, 51).unwrap();
        let spec = spec();
        let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
        let mut mem = MemoryState::zeros(&grid);
        let planning = vec![-2.0; 51];
        for _ in 0..1000 {
            memory_step(&mut mem, &spec, &planning, &mut conv, 0.1).unwrap();
        }
        assert!(mem.u_mem.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn plateau_accumulation_converges_to_convolved_profile() {
        // Hold the source at a hard supra-threshold plateau and run to the
        // fixed point; every site must land on the direct-sum convolution
        // oracle.
        let grid = FieldGrid::new(-10.0, 10.0, 201).unwrap();
        let spec = spec();
        let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
        let mut planning = vec![-1000.0; 201];
        // g saturates to exactly 1 on the plateau
        for site in planning.iter_mut().take(111).skip(90) {
            *site = 1000.0;
        }
        let mut mem = MemoryState::zeros(&grid);
        let dt = 0.1;
        for _ in 0..((40.0 * spec.tau_mem / dt) as usize) {
            memory_step(&mut mem, &spec, &planning, &mut conv, dt).unwrap();
        }
        let row = kernel_row(&grid, &spec.kernel);
        let oracle = lateral_interaction_direct(&planning, &row, &SIG, grid.dx()).unwrap();
        for (i, (m, o)) in mem.u_mem.iter().zip(&oracle).enumerate() {
            assert!((m - o).abs() < 1e-9, "site {i}: {m} vs {o}");
        }
    }

    #[test]
    fn trace_is_broader_than_the_thresholded_source() {
        // The smoothing convolution widens the footprint: compare extents
        // above 10% of the respective maxima.
        let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
        let spec = spec();
        let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
        // Narrow supra-threshold peak around x = 0.
        let planning: Vec<f64> = grid
            .sites()
            .map(|x| -5.0 + 7.0 * (-(x * x) / (2.0 * 0.5 * 0.5)).exp())
            .collect();
        let mut mem = MemoryState::zeros(&grid);
        for _ in 0..40_000 {
            memory_step(&mut mem, &spec, &planning, &mut conv, 0.1).unwrap();
        }
        let extent = |v: &[f64]| {
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v.iter().filter(|&&x| x > 0.1 * max).count()
        };
        let g_prof: Vec<f64> = crate::kernel::sigmoid(&planning, &SIG);
        assert!(
            extent(&mem.u_mem) > extent(&g_prof),
            "memory extent {} vs source extent {}",
            extent(&mem.u_mem),
            extent(&g_prof)
        );
    }

    #[test]
    fn accumulate_then_decay_retains_most_of_the_trace() {
        // With tau_decay = 5 tau_mem, accumulating for 2 tau_mem and then
        // decaying for the same duration leaves more than (1 - 1/e) of the
        // peak trace in place.
        let grid = FieldGrid::new(-10.0, 10.0, 101).unwrap();
        let spec = MemorySpec::new(20.0, 100.0, smoothing_kernel(), SIG).unwrap();
        let mut conv = Convolver::new(&grid, &spec.kernel).unwrap();
        let mut planning = vec![-1000.0; 101];
        for site in planning.iter_mut().take(56).skip(45) {
            *site = 1000.0;
        }
        let mut mem = MemoryState::zeros(&grid);
        let dt = 0.05;
        let phase = (2.0 * spec.tau_mem / dt) as usize;
        for _ in 0..phase {
            memory_step(&mut mem, &spec, &planning, &mut conv, dt).unwrap();
        }
        let peak_after_accumulation = mem.u_mem[50];
        let rest = vec![-1000.0; 101];
        for _ in 0..phase {
            memory_step(&mut mem, &spec, &rest, &mut conv, dt).unwrap();
        }
        let kept = mem.u_mem[50] / peak_after_accumulation;
        assert!(kept > 1.0 - (-1.0f64).exp(), "kept only {kept}");
    }
}
