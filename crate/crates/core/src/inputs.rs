//! Gaussian input bumps with explicit on/off windows.
//!
//! Activity windows are half-open `[t_on, t_off)` so that abutting schedules
//! hand over in a single step with no overlap and no gap. There is no onset
//! ramp; an input contributes its full profile from the first step where
//! `t >= t_on`.

use crate::error::ModelError;
use crate::grid::FieldGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianBump {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.width > 0.0) {
            return Err(ModelError::NonPositiveWidth(self.width));
        }
        Ok(())
    }

    #[inline]
    pub fn value_at(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.amplitude * (-(d * d) / (2.0 * self.width * self.width)).exp()
    }

    /// Bump sampled on every grid site.
    pub fn profile(&self, grid: &FieldGrid) -> Vec<f64> {
        grid.sites().map(|x| self.value_at(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledInput {
    pub bump: GaussianBump,
    pub t_on: f64,
    pub t_off: f64,
    /// Field this input drives; resolved against the model at assembly.
    pub target_field: String,
}

impl ScheduledInput {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.bump.validate()?;
        if !(self.t_on < self.t_off) {
            return Err(ModelError::EmptyInputWindow {
                t_on: self.t_on,
                t_off: self.t_off,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn active_at(&self, t: f64) -> bool {
        t >= self.t_on && t < self.t_off
    }
}

/// Sum of all inputs targeting `field_id` that are active at time `t`,
/// sampled on the grid. A zero vector when nothing is active.
///
/// Unknown ids simply select nothing here; referential integrity of
/// `target_field` against the model is enforced at scenario validation.
pub fn evaluate_inputs(
    inputs: &[ScheduledInput],
    field_id: &str,
    grid: &FieldGrid,
    t: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_points()];
    evaluate_inputs_into(inputs, field_id, grid, t, &mut out);
    out
}

pub fn evaluate_inputs_into(
    inputs: &[ScheduledInput],
    field_id: &str,
    grid: &FieldGrid,
    t: f64,
    out: &mut [f64],
) {
    out.fill(0.0);
    for input in inputs {
        if input.target_field == field_id && input.active_at(t) {
            for (i, x) in grid.sites().enumerate() {
                out[i] += input.bump.value_at(x);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(a: f64, p: f64, w: f64) -> GaussianBump {
        GaussianBump {
            amplitude: a,
            center: p,
            width: w,
        }
    }

    fn sched(a: f64, p: f64, w: f64, t_on: f64, t_off: f64, field: &str) -> ScheduledInput {
        ScheduledInput {
            bump: bump(a, p, w),
            t_on,
            t_off,
            target_field: field.to_string(),
        }
    }

    #[test]
    fn peak_value_is_the_amplitude() {
        let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
        let inputs = [sched(2.5, 3.0, 1.0, 0.0, 10.0, "planning")];
        let v = evaluate_inputs(&inputs, "planning", &grid, 5.0);
        assert_eq!(v[260], 2.5); // site 260 sits exactly at x = 3
    }

    #[test]
    fn window_is_half_open() {
        let grid = FieldGrid::new(-10.0, 10.0, 11).unwrap();
        let inputs = [sched(1.0, 0.0, 1.0, 10.0, 20.0, "f")];
        assert!(evaluate_inputs(&inputs, "f", &grid, 9.999).iter().all(|&v| v == 0.0));
        assert!(evaluate_inputs(&inputs, "f", &grid, 10.0).iter().any(|&v| v > 0.0));
        assert!(evaluate_inputs(&inputs, "f", &grid, 19.999).iter().any(|&v| v > 0.0));
        assert!(evaluate_inputs(&inputs, "f", &grid, 20.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn off_target_inputs_do_not_leak() {
        let grid = FieldGrid::new(-10.0, 10.0, 11).unwrap();
        let inputs = [sched(1.0, 0.0, 1.0, 0.0, 10.0, "perception")];
        assert!(evaluate_inputs(&inputs, "planning", &grid, 5.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn competing_pair_is_symmetric_with_known_midpoint() {
        // Two equal bumps at -5 and +5; the midpoint value is frozen from an
        // independent evaluation of 2 a exp(-25 / (2 w^2)) with a = 2, w = 2.
        let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
        let inputs = [
            sched(2.0, -5.0, 2.0, 0.0, 1.0, "f"),
            sched(2.0, 5.0, 2.0, 0.0, 1.0, "f"),
        ];
        let v = evaluate_inputs(&inputs, "f", &grid, 0.5);
        let n = grid.n_points();
        for i in 0..n {
            assert!((v[i] - v[n - 1 - i]).abs() < 1e-12, "asymmetry at {i}");
        }
        assert!((v[200] - 0.17574773449362968).abs() < 1e-15);
    }

    #[test]
    fn superposition_holds() {
        let grid = FieldGrid::new(-10.0, 10.0, 101).unwrap();
        let inputs = [
            sched(1.0, -5.0, 0.8, 0.0, 10.0, "f"),
            sched(0.5, 2.0, 2.0, 0.0, 10.0, "f"),
            sched(3.0, 7.5, 1.3, 5.0, 15.0, "f"),
            sched(2.0, 0.0, 1.0, 20.0, 30.0, "f"), // inactive at t = 6
        ];
        let t = 6.0;
        let combined = evaluate_inputs(&inputs, "f", &grid, t);
        let mut summed = vec![0.0; grid.n_points()];
        for input in &inputs {
            let single = evaluate_inputs(std::slice::from_ref(input), "f", &grid, t);
            for (s, v) in summed.iter_mut().zip(&single) {
                *s += v;
            }
        }
        for (a, b) in combined.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn support_decays_to_nothing_past_six_widths() {
        let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
        let a = 4.0;
        let w = 0.7;
        let inputs = [sched(a, -2.0, w, 0.0, 1.0, "f")];
        let v = evaluate_inputs(&inputs, "f", &grid, 0.0);
        for (i, x) in grid.sites().enumerate() {
            if (x - (-2.0)).abs() > 6.0 * w {
                assert!(v[i] < a * 1e-7, "x={x}: {}", v[i]);
            }
        }
    }

    #[test]
    fn rejects_inverted_window_and_bad_width() {
        assert!(sched(1.0, 0.0, 1.0, 5.0, 5.0, "f").validate().is_err());
        assert!(sched(1.0, 0.0, 0.0, 0.0, 5.0, "f").validate().is_err());
    }
}
