//! Discrete approximation of the lateral-interaction integral
//! `sum_j k(x_i - x_j) g(u_j) dx`, with contributions outside the domain
//! truncated to zero.
//!
//! Two routes compute the same sum: a direct O(N^2) loop kept as the
//! reference, and an FFT-based linear convolution used by the simulation
//! loop. The test suite holds them to 1e-10 of each other.

use crate::error::ModelError;
use crate::grid::FieldGrid;
use crate::kernel::{kernel_row, sigmoid, sigmoid_into, KernelParams, SigmoidParams};
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use std::sync::Arc;

/// Reference path: direct double loop over sites.
pub fn lateral_interaction_direct(
    u: &[f64],
    kernel_row: &[f64],
    sig: &SigmoidParams,
    dx: f64,
) -> Result<Vec<f64>, ModelError> {
    let n = u.len();
    if kernel_row.len() != 2 * n - 1 {
        return Err(ModelError::KernelRowLength {
            expected: 2 * n - 1,
            got: kernel_row.len(),
        });
    }
    let g = sigmoid(u, sig);
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &gj) in g.iter().enumerate() {
            // kernel_row is indexed by offset i - j, shifted by n - 1.
            acc += kernel_row[i + n - 1 - j] * gj;
        }
        *o = acc * dx;
    }
    Ok(out)
}

/// FFT-accelerated interaction. Plans and the kernel spectrum are built once
/// per field and reused every step; `interaction` does no allocation.
pub struct Convolver {
    n: usize,
    dx: f64,
    kernel_row: Vec<f64>,
    zero_kernel: bool,
    fft_len: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    kernel_spectrum: Vec<Complex<f64>>,
    g_buf: Vec<f64>,
    real_buf: Vec<f64>,
    spec_buf: Vec<Complex<f64>>,
    time_buf: Vec<f64>,
    out_buf: Vec<f64>,
}

impl Convolver {
    pub fn new(grid: &FieldGrid, params: &KernelParams) -> Result<Self, ModelError> {
        params.validate()?;
        Self::from_kernel_row(kernel_row(grid, params), grid.n_points(), grid.dx())
    }

    pub fn from_kernel_row(row: Vec<f64>, n: usize, dx: f64) -> Result<Self, ModelError> {
        if row.len() != 2 * n - 1 {
            return Err(ModelError::KernelRowLength {
                expected: 2 * n - 1,
                got: row.len(),
            });
        }
        let zero_kernel = row.iter().all(|&k| k == 0.0);
        // Linear convolution of (2n-1)-tap kernel with n samples spans 3n-2.
        let fft_len = (3 * n - 2).next_power_of_two();
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(fft_len);
        let c2r = planner.plan_fft_inverse(fft_len);

        let mut real_buf = r2c.make_input_vec();
        let mut kernel_spectrum = r2c.make_output_vec();
        real_buf[..row.len()].copy_from_slice(&row);
        r2c.process(&mut real_buf, &mut kernel_spectrum)
            .expect("fft buffer lengths are fixed at construction");

        let spec_buf = r2c.make_output_vec();
        let time_buf = c2r.make_output_vec();
        Ok(Self {
            n,
            dx,
            kernel_row: row,
            zero_kernel,
            fft_len,
            r2c,
            c2r,
            kernel_spectrum,
            g_buf: vec![0.0; n],
            real_buf,
            spec_buf,
            time_buf,
            out_buf: vec![0.0; n],
        })
    }

    pub fn kernel_row(&self) -> &[f64] {
        &self.kernel_row
    }

    pub fn is_zero(&self) -> bool {
        self.zero_kernel
    }

    /// Convolve an already-thresholded activation pattern with the kernel.
    pub fn apply_g(&mut self, g: &[f64]) -> &[f64] {
        assert_eq!(g.len(), self.n, "activation length must match the grid");
        if self.zero_kernel {
            self.out_buf.fill(0.0);
            return &self.out_buf;
        }
        self.real_buf.fill(0.0);
        self.real_buf[..self.n].copy_from_slice(g);
        self.r2c
            .process(&mut self.real_buf, &mut self.spec_buf)
            .expect("fft buffer lengths are fixed at construction");
        // Fold dx and the inverse-FFT normalization into the product.
        let scale = self.dx / self.fft_len as f64;
        for (s, k) in self.spec_buf.iter_mut().zip(&self.kernel_spectrum) {
            *s *= k * scale;
        }
        self.c2r
            .process(&mut self.spec_buf, &mut self.time_buf)
            .expect("fft buffer lengths are fixed at construction");
        // Full convolution index m = i + (n - 1) lines up site i with offset 0.
        self.out_buf.copy_from_slice(&self.time_buf[self.n - 1..2 * self.n - 1]);
        &self.out_buf
    }

    /// Threshold `u` through the sigmoid, then convolve.
    pub fn interaction(&mut self, u: &[f64], sig: &SigmoidParams) -> &[f64] {
        assert_eq!(u.len(), self.n, "activation length must match the grid");
        let mut g = std::mem::take(&mut self.g_buf);
        sigmoid_into(u, sig, &mut g);
        self.apply_g(&g);
        self.g_buf = g;
        &self.out_buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sigmoid_scalar;

    fn test_kernel() -> KernelParams {
        KernelParams {
            c_excite: 2.0,
            sigma_excite: 1.0,
            c_inhibit: 1.0,
            sigma_inhibit: 3.0,
            c_global: 0.2,
        }
    }

    const SIG: SigmoidParams = SigmoidParams {
        beta: 4.0,
        alpha: 0.0,
    };

    #[test]
    fn subthreshold_field_produces_negligible_interaction() {
        let grid = FieldGrid::new(-10.0, 10.0, 201).unwrap();
        let u = vec![-10.0; 201];
        let row = kernel_row(&grid, &test_kernel());
        let out = lateral_interaction_direct(&u, &row, &SIG, grid.dx()).unwrap();
        for v in out {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn one_hot_impulse_reproduces_kernel_shape() {
        // A single supra-threshold site convolves to the kernel row around it,
        // scaled by g(u_j) * dx; everything else sits at the sigmoid floor.
        let grid = FieldGrid::new(-10.0, 10.0, 201).unwrap();
        let n = grid.n_points();
        let j = 80;
        let mut u = vec![-1000.0; n]; // g underflows to exactly 0
        u[j] = 1000.0; // g saturates to exactly 1
        let params = test_kernel();
        let row = kernel_row(&grid, &params);
        let out = lateral_interaction_direct(&u, &row, &SIG, grid.dx()).unwrap();
        for i in 0..n {
            let expected = row[i + n - 1 - j] * grid.dx();
            assert!(
                (out[i] - expected).abs() < 1e-12,
                "site {i}: {} vs {}",
                out[i],
                expected
            );
        }
    }

    #[test]
    fn fft_path_matches_direct_path() {
        let grid = FieldGrid::new(-10.0, 10.0, 401).unwrap();
        let params = test_kernel();
        let mut conv = Convolver::new(&grid, &params).unwrap();
        let row = kernel_row(&grid, &params);

        // Deterministic quasi-random field values spanning both sigmoid regimes.
        let u: Vec<f64> = (0..grid.n_points())
            .map(|i| 8.0 * ((i as f64 * 0.7131).sin() + 0.3 * (i as f64 * 0.1113).cos()))
            .collect();
        let direct = lateral_interaction_direct(&u, &row, &SIG, grid.dx()).unwrap();
        let fast = conv.interaction(&u, &SIG);
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_kernel_short_circuits() {
        let grid = FieldGrid::new(-1.0, 1.0, 33).unwrap();
        let mut conv = Convolver::new(&grid, &KernelParams::zero()).unwrap();
        assert!(conv.is_zero());
        let u = vec![5.0; 33];
        assert!(conv.interaction(&u, &SIG).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_mismatched_kernel_row() {
        let u = vec![0.0; 10];
        let row = vec![0.0; 12];
        assert!(matches!(
            lateral_interaction_direct(&u, &row, &SIG, 0.1),
            Err(ModelError::KernelRowLength { .. })
        ));
    }

    #[test]
    fn interaction_uses_the_sigmoided_field() {
        // Constant supra-threshold field: every site contributes g(c), so the
        // interaction equals g(c) * dx * (partial sums of the kernel row).
        let grid = FieldGrid::new(-2.0, 2.0, 41).unwrap();
        let params = test_kernel();
        let mut conv = Convolver::new(&grid, &params).unwrap();
        let row = kernel_row(&grid, &params);
        let c = 0.35;
        let u = vec![c; 41];
        let out = conv.interaction(&u, &SIG).to_vec();
        let g = sigmoid_scalar(c, &SIG);
        let n = 41;
        for (i, &v) in out.iter().enumerate() {
            let expected: f64 = (0..n).map(|j| row[i + n - 1 - j]).sum::<f64>() * g * grid.dx();
            assert!((v - expected).abs() < 1e-12);
        }
    }
}
