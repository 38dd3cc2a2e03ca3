//! Closed-form heat kernel of the quadratic-potential operator
//! (1/2) Delta - (1/2) a^2 |x|^2 on R^N:
//!
//!   L(x, x0; t) = (a / (2 pi sinh(at)))^{N/2}
//!                 exp( -(a / (2 sinh(at))) ((|x|^2 + |x0|^2) cosh(at) - 2 x.x0) )
//!
//! evaluated in log-domain. With a = |xi| this is the per-frequency factor of
//! the Grushin heat kernel after a partial Fourier transform in y.

use crate::error::{GrushinError, Result};
use crate::grid::Grid;
use crate::numerics::{csch, ln_sinh};
use rayon::prelude::*;

/// Below this value of a*t the kernel is numerically the a -> 0 Gaussian
/// limit (2 pi t)^{-N/2} exp(-|x-x0|^2 / 2t); the switch error is bounded by
/// the quadratic terms of coth(z) ~ 1/z + z/3 and z/sinh(z) ~ 1 - z^2/6.
const GAUSSIAN_LIMIT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorKernel {
    /// Frequency a >= 0 (plays |xi|).
    pub freq: f64,
    /// Spatial dimension N.
    pub dims: usize,
    /// Time t > 0.
    pub time: f64,
}

impl OscillatorKernel {
    pub fn new(freq: f64, dims: usize, time: f64) -> Result<Self> {
        if !(time > 0.0) || !time.is_finite() {
            return Err(GrushinError::Domain(format!(
                "oscillator kernel needs t > 0, got {time}"
            )));
        }
        if !(freq >= 0.0) || !freq.is_finite() {
            return Err(GrushinError::Domain(format!(
                "oscillator kernel needs a >= 0, got {freq}"
            )));
        }
        if dims == 0 {
            return Err(GrushinError::InvalidParams("oscillator needs N >= 1".into()));
        }
        Ok(OscillatorKernel { freq, dims, time })
    }

    /// log L(x, x0; t). The exponent is assembled from the cancellation-free
    /// split (|x|^2 + |x0|^2) cosh - 2 x.x0 = |x - x0|^2 + (|x|^2 + |x0|^2)(cosh - 1),
    /// i.e. csch and tanh(z/2) terms, and exponentiated once by the caller.
    pub fn log_point(&self, x: &[f64], x0: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dims);
        debug_assert_eq!(x0.len(), self.dims);
        let n = self.dims as f64;
        let t = self.time;
        let a = self.freq;
        let z = a * t;

        let mut diff_sq = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..x.len() {
            let d = x[i] - x0[i];
            diff_sq += d * d;
            sum_sq += x[i] * x[i] + x0[i] * x0[i];
        }

        if z < GAUSSIAN_LIMIT_THRESHOLD {
            return -0.5 * n * (2.0 * std::f64::consts::PI * t).ln() - diff_sq / (2.0 * t);
        }

        let ln_prefactor =
            0.5 * n * (a.ln() - ln_sinh(z) - (2.0 * std::f64::consts::PI).ln());
        let exponent = -0.5 * a * (csch(z) * diff_sq + (0.5 * z).tanh() * sum_sq);
        ln_prefactor + exponent
    }

    pub fn point(&self, x: &[f64], x0: &[f64]) -> f64 {
        self.log_point(x, x0).exp()
    }
}

/// Quadratic-potential propagator evaluated at frequency `kern.freq`.
pub fn mehler_point(kern: &OscillatorKernel, x: &[f64], x0: &[f64]) -> f64 {
    kern.point(x, x0)
}

/// Dense square matrix over the flattened x-grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, data: vec![0.0; dim * dim] }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.dim)) {
            *o = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
    }

    /// Applies the matrix to two vectors at once (used for the real and
    /// imaginary parts of a spectral column).
    pub fn matvec2(&self, vr: &[f64], vi: &[f64], or_: &mut [f64], oi: &mut [f64]) {
        for i in 0..self.dim {
            let row = self.row(i);
            let mut ar = 0.0;
            let mut ai = 0.0;
            for j in 0..self.dim {
                ar += row[j] * vr[j];
                ai += row[j] * vi[j];
            }
            or_[i] = ar;
            oi[i] = ai;
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = DenseMatrix::zeros(d);
        for i in 0..d {
            for l in 0..d {
                let a = self.data[i * d + l];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * d..(i + 1) * d];
                for j in 0..d {
                    dst[j] += a * src[j];
                }
            }
        }
        out
    }

    /// Operator infinity-norm (max absolute row sum).
    pub fn op_inf_norm(&self) -> f64 {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    }
}

/// Discretization of the integral operator phi -> integral L(x, w; t) phi(w) dw
/// on the x-grid: M[i][j] = L(x_i, x_j; t) * (x-cell volume). Symmetric with
/// nonnegative entries.
pub fn mehler_matrix(kern: &OscillatorKernel, grid: &Grid) -> Result<DenseMatrix> {
    if kern.dims != grid.x_dims {
        return Err(GrushinError::GridMismatch(format!(
            "kernel dimension {} does not match grid x-dimension {}",
            kern.dims, grid.x_dims
        )));
    }
    let dim = grid.x_count();
    let vol = grid.x_spacing().powi(grid.x_dims as i32);
    let mut data = vec![0.0; dim * dim];
    data.par_chunks_exact_mut(dim).enumerate().for_each(|(i, row)| {
        let mut xi = Vec::new();
        let mut xj = Vec::new();
        grid.x_point(i, &mut xi);
        for (j, slot) in row.iter_mut().enumerate() {
            grid.x_point(j, &mut xj);
            *slot = kern.point(&xi, &xj) * vol;
        }
    });
    Ok(DenseMatrix { dim, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_nonpositive_time() {
        assert!(OscillatorKernel::new(1.0, 1, 0.0).is_err());
        assert!(OscillatorKernel::new(1.0, 1, -1.0).is_err());
        assert!(OscillatorKernel::new(-1.0, 1, 1.0).is_err());
    }

    #[test]
    fn gaussian_limit_at_tiny_frequency() {
        let kern = OscillatorKernel::new(1e-12, 1, 1.0).unwrap();
        let v = kern.point(&[1.0], &[0.0]);
        let expected = (2.0 * std::f64::consts::PI).powf(-0.5) * (-0.5_f64).exp();
        assert_relative_eq!(v, expected, max_relative = 1e-10);
    }

    #[test]
    fn direct_substitution_at_unit_frequency() {
        // a = 1, t = 1, x = x0 = 0: (1 / (2 pi sinh 1))^{1/2}
        let kern = OscillatorKernel::new(1.0, 1, 1.0).unwrap();
        let v = kern.point(&[0.0], &[0.0]);
        let expected = (1.0 / (2.0 * std::f64::consts::PI * 1.0_f64.sinh())).sqrt();
        assert_relative_eq!(v, expected, max_relative = 1e-13);
        assert_relative_eq!(v, 0.36800, epsilon = 1e-5);
    }

    #[test]
    fn symmetry_is_exact() {
        let kern = OscillatorKernel::new(0.7, 2, 0.9).unwrap();
        let x = [0.3, -1.2];
        let x0 = [-0.8, 0.45];
        assert_eq!(kern.point(&x, &x0).to_bits(), kern.point(&x0, &x).to_bits());
    }

    #[test]
    fn no_overflow_at_large_at() {
        // a t = 700 used to overflow sinh in double precision
        let kern = OscillatorKernel::new(700.0, 1, 1.0).unwrap();
        let v = kern.point(&[0.5], &[-0.25]);
        assert!(v.is_finite());
        assert!(v >= 0.0);
    }

    #[test]
    fn positive_on_probed_points() {
        let kern = OscillatorKernel::new(2.5, 1, 0.3).unwrap();
        for i in 0..100 {
            let x = -3.0 + 6.0 * (i as f64) / 99.0;
            assert!(kern.point(&[x], &[0.7]) > 0.0);
        }
    }

    #[test]
    fn matrix_is_symmetric_and_nonnegative() {
        let grid = Grid::new(1, 1, 6.0, 48, 6.0, 8).unwrap();
        let kern = OscillatorKernel::new(1.0, 1, 1.0).unwrap();
        let m = mehler_matrix(&kern, &grid).unwrap();
        for i in 0..m.dim {
            for j in 0..i {
                let d = (m.data[i * m.dim + j] - m.data[j * m.dim + i]).abs();
                assert!(d <= 1e-13 * m.data[i * m.dim + j].abs().max(1e-300));
            }
        }
        assert!(m.data.iter().all(|&v| v >= 0.0));
    }
}
