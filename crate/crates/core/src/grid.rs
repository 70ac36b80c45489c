use crate::error::ModelError;

/// Uniform discretization of the one-dimensional metric dimension the fields
/// live on. Site `i` sits at `x_min + i * dx` with
/// `dx = (x_max - x_min) / (n_points - 1)`, so the first and last sites land
/// on the bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl FieldGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, ModelError> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(ModelError::InvalidGridBounds { x_min, x_max });
        }
        if n_points < 3 {
            return Err(ModelError::GridTooSmall(n_points));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn site(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.x_min + i as f64 * self.dx
    }

    pub fn sites(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.site(i))
    }

    /// Signed offsets `-(n-1)*dx ..= (n-1)*dx`, the arguments the interaction
    /// kernel is sampled at. Length is `2 * n_points - 1`.
    pub fn offsets(&self) -> Vec<f64> {
        let n = self.n_points as isize;
        (-(n - 1)..n).map(|j| j as f64 * self.dx).collect()
    }

    pub fn check_len(&self, v: &[f64]) -> Result<(), ModelError> {
        if v.len() != self.n_points {
            return Err(ModelError::LengthMismatch {
                expected: self.n_points,
                got: v.len(),
            });
        }
        Ok(())
    }
}
