//! Tensor grids over the x-block and y-block, and scalar fields sampled on
//! them.
//!
//! A grid covers the box [-x_extent, x_extent)^N x [-y_extent, y_extent)^k
//! with uniform spacing 2*extent/points per axis. The right endpoint is
//! excluded so the y-axes wrap periodically for discrete Fourier transforms;
//! fields are assumed negligible at the x-edges (zero padding).

use crate::error::{GrushinError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Number of x-axes (the dimension N of the non-degenerate block).
    pub x_dims: usize,
    /// Number of y-axes (the dimension k of the degenerate block).
    pub y_dims: usize,
    /// Half-width of the box per x-axis.
    pub x_extent: f64,
    /// Points per x-axis.
    pub x_points: usize,
    /// Half-width of the box per y-axis.
    pub y_extent: f64,
    /// Points per y-axis (powers of two transform fastest).
    pub y_points: usize,
}

impl Grid {
    pub fn new(
        x_dims: usize,
        y_dims: usize,
        x_extent: f64,
        x_points: usize,
        y_extent: f64,
        y_points: usize,
    ) -> Result<Self> {
        if x_dims == 0 || y_dims == 0 {
            return Err(GrushinError::InvalidParams(
                "grid needs at least one x-axis and one y-axis".into(),
            ));
        }
        if !(x_extent > 0.0) || !(y_extent > 0.0) {
            return Err(GrushinError::InvalidParams("grid extents must be positive".into()));
        }
        if x_points < 4 || y_points < 4 {
            return Err(GrushinError::InvalidParams(
                "grid needs at least 4 points per axis".into(),
            ));
        }
        Ok(Grid { x_dims, y_dims, x_extent, x_points, y_extent, y_points })
    }

    /// Desk-scale default: N = k = 1, 128 x 256 points, extents 8 and 12.
    pub fn default_desk() -> Self {
        Grid { x_dims: 1, y_dims: 1, x_extent: 8.0, x_points: 128, y_extent: 12.0, y_points: 256 }
    }

    pub fn x_spacing(&self) -> f64 {
        2.0 * self.x_extent / self.x_points as f64
    }

    pub fn y_spacing(&self) -> f64 {
        2.0 * self.y_extent / self.y_points as f64
    }

    /// Total number of x-grid points across all x-axes.
    pub fn x_count(&self) -> usize {
        self.x_points.pow(self.x_dims as u32)
    }

    /// Total number of y-grid points across all y-axes.
    pub fn y_count(&self) -> usize {
        self.y_points.pow(self.y_dims as u32)
    }

    pub fn len(&self) -> usize {
        self.x_count() * self.y_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.x_spacing().powi(self.x_dims as i32) * self.y_spacing().powi(self.y_dims as i32)
    }

    pub fn x_axis_coord(&self, i: usize) -> f64 {
        -self.x_extent + i as f64 * self.x_spacing()
    }

    pub fn y_axis_coord(&self, i: usize) -> f64 {
        -self.y_extent + i as f64 * self.y_spacing()
    }

    /// Coordinates of the flat x-index `flat` (row-major over the x-axes).
    pub fn x_point(&self, mut flat: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.x_dims, 0.0);
        for axis in (0..self.x_dims).rev() {
            out[axis] = self.x_axis_coord(flat % self.x_points);
            flat /= self.x_points;
        }
    }

    /// Coordinates of the flat y-index `flat` (row-major over the y-axes).
    pub fn y_point(&self, mut flat: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.y_dims, 0.0);
        for axis in (0..self.y_dims).rev() {
            out[axis] = self.y_axis_coord(flat % self.y_points);
            flat /= self.y_points;
        }
    }

    /// Grid rescaled for kernel diagnostics at time `t`, treating `self` as
    /// the reference geometry at t = 1. Kernel width grows like sqrt(t) in x
    /// and like t in y, so scaling the extents this way keeps both the tails
    /// and the per-cell resolution t-independent.
    pub fn scaled_for_time(&self, t: f64) -> Grid {
        Grid {
            x_extent: self.x_extent * t.sqrt(),
            y_extent: self.y_extent * t,
            ..*self
        }
    }
}

/// A real scalar field sampled on a [`Grid`], stored x-major then y-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Field { grid, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GrushinError::GridMismatch(format!(
                "field has {} samples but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        let f = Field { grid, values };
        f.check_finite()?;
        Ok(f)
    }

    /// Sample `f(x, y)` at every grid point.
    pub fn from_fn<F: Fn(&[f64], &[f64]) -> f64>(grid: Grid, f: F) -> Self {
        let xc = grid.x_count();
        let yc = grid.y_count();
        let mut values = Vec::with_capacity(xc * yc);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for ix in 0..xc {
            grid.x_point(ix, &mut x);
            for iy in 0..yc {
                grid.y_point(iy, &mut y);
                values.push(f(&x, &y));
            }
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(GrushinError::InvalidField("field contains non-finite samples".into()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Elementwise `self + c * other`.
    pub fn axpy(&mut self, c: f64, other: &Field) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

/// Grid L^q norm by tensor-product composite quadrature: the grid excludes
/// the box edge and fields are negligible there, so the trapezoid rule
/// reduces to the cell-volume-weighted sum. `q = f64::INFINITY` gives the max
/// norm.
pub fn lp_norm(f: &Field, q: f64) -> Result<f64> {
    f.check_finite()?;
    if q.is_infinite() && q > 0.0 {
        return Ok(f.max_abs());
    }
    if !(q >= 1.0) {
        return Err(GrushinError::InvalidParams(format!("L^q norm needs q >= 1, got {q}")));
    }
    let vol = f.grid.cell_volume();
    let mut acc = 0.0;
    if (q - 1.0).abs() < 1e-15 {
        for v in &f.values {
            acc += v.abs();
        }
    } else if (q - 2.0).abs() < 1e-15 {
        for v in &f.values {
            acc += v * v;
        }
    } else {
        for v in &f.values {
            acc += v.abs().powf(q);
        }
    }
    Ok((acc * vol).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(0, 1, 8.0, 128, 12.0, 256).is_err());
        assert!(Grid::new(1, 1, -8.0, 128, 12.0, 256).is_err());
        assert!(Grid::new(1, 1, 8.0, 2, 12.0, 256).is_err());
    }

    #[test]
    fn spacing_matches_definition() {
        let g = Grid::default_desk();
        assert_relative_eq!(g.x_spacing(), 0.125);
        assert_relative_eq!(g.y_spacing(), 0.09375);
        assert_eq!(g.len(), 128 * 256);
    }

    #[test]
    fn max_norm_of_constant_is_its_magnitude() {
        let g = Grid::new(1, 1, 4.0, 16, 4.0, 16).unwrap();
        let f = Field::from_fn(g, |_, _| -2.5);
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 2.5);
    }

    #[test]
    fn gaussian_l2_norm_matches_separable_integral() {
        // N = k = 1 wide grid: ||e^{-(x^2+y^2)/2}||_2 = sqrt(pi)
        let g = Grid::new(1, 1, 10.0, 256, 10.0, 256).unwrap();
        let f = Field::from_fn(g, |x, y| (-(x[0] * x[0] + y[0] * y[0]) / 2.0).exp());
        let n = lp_norm(&f, 2.0).unwrap();
        assert_relative_eq!(n, std::f64::consts::PI.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn non_finite_field_is_rejected() {
        let g = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        let mut f = Field::zeros(g);
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(lp_norm(&f, 2.0), Err(GrushinError::InvalidField(_))));
    }

    #[test]
    fn x_point_decodes_row_major() {
        let g = Grid::new(2, 1, 1.0, 4, 1.0, 4).unwrap();
        let mut x = Vec::new();
        g.x_point(0, &mut x);
        assert_eq!(x, vec![-1.0, -1.0]);
        g.x_point(1, &mut x);
        assert_eq!(x, vec![-1.0, -0.5]);
        g.x_point(4, &mut x);
        assert_eq!(x, vec![-0.5, -1.0]);
    }
}
