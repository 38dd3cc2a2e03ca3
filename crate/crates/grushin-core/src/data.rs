//! Stock initial data: Gaussian bumps and smoothed plateaus.

use crate::grid::{Field, Grid};

/// Centered Gaussian `amplitude * exp(-(|x|^2 + |y|^2) / (2 width^2))`.
pub fn gaussian_bump(grid: Grid, amplitude: f64, width: f64) -> Field {
    let inv = 1.0 / (2.0 * width * width);
    Field::from_fn(grid, |x, y| {
        let r2 = x.iter().chain(y).map(|v| v * v).sum::<f64>();
        amplitude * (-r2 * inv).exp()
    })
}

/// Quintic smoothstep ramp: 1 for d <= radius - edge, 0 for d >= radius, C^2
/// in between.
fn ramp(d: f64, radius: f64, edge: f64) -> f64 {
    if d <= radius - edge {
        1.0
    } else if d >= radius {
        0.0
    } else {
        let u = (radius - d) / edge;
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Plateau of height `amplitude` over |x| <= x_radius, |y| <= y_radius with
/// C^2 edges of width `edge`.
pub fn smooth_plateau(
    grid: Grid,
    amplitude: f64,
    x_radius: f64,
    y_radius: f64,
    edge: f64,
) -> Field {
    Field::from_fn(grid, |x, y| {
        let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ry = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        amplitude * ramp(rx, x_radius, edge) * ramp(ry, y_radius, edge)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_flat_inside_and_zero_outside() {
        let grid = Grid::new(1, 1, 8.0, 64, 8.0, 64).unwrap();
        let f = smooth_plateau(grid, 10.0, 4.0, 4.0, 0.5);
        let mid = f.values()[f.values().len() / 2 + 32]; // x = 0 row, y = 0
        assert_eq!(mid, 10.0);
        assert_eq!(f.values()[0], 0.0); // far corner
    }

    #[test]
    fn gaussian_peak_is_the_amplitude() {
        let grid = Grid::new(1, 1, 8.0, 64, 8.0, 64).unwrap();
        let f = gaussian_bump(grid, 3.0, 1.0);
        assert!((f.max_abs() - 3.0).abs() < 1e-12);
    }
}
