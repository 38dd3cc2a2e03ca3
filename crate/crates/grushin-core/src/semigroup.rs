//! Application of the Grushin heat semigroup S_G(t) to gridded data.
//!
//! The kernel is a convolution in y but not in x, so the discretization is a
//! discrete Fourier transform along the periodic y-axes composed with one
//! dense Mehler matrix per retained frequency magnitude along x. On the
//! y-torus this factorization is exact; the box is taken large enough that
//! the wrap-around (periodization) mass is negligible, see
//! [`PropagatorBank::wraparound_bound`].

use crate::error::{GrushinError, Result};
use crate::grid::{Field, Grid};
use crate::oscillator::{mehler_matrix, DenseMatrix, OscillatorKernel};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Relative imaginary residue allowed after the inverse transform of a real
/// field before the application is declared a numerical failure.
const IMAG_RESIDUE_TOL: f64 = 1e-12;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    if forward {
        p.plan_fft_forward(len)
    } else {
        p.plan_fft_inverse(len)
    }
}

/// Per-time-step realization of S_G(t): one dense x-matrix per distinct
/// discrete frequency magnitude of the y-grid.
#[derive(Clone)]
pub struct PropagatorBank {
    grid: Grid,
    time: f64,
    /// Distinct |xi| values, one per matrix.
    freq_magnitudes: Vec<f64>,
    matrices: Vec<DenseMatrix>,
    /// Flat y-frequency index -> index into `matrices`.
    matrix_of_freq: Vec<usize>,
}

impl PropagatorBank {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn freq_magnitudes(&self) -> &[f64] {
        &self.freq_magnitudes
    }

    pub fn matrices(&self) -> &[DenseMatrix] {
        &self.matrices
    }

    pub fn matrix_of_freq(&self) -> &[usize] {
        &self.matrix_of_freq
    }

    /// The matrix attached to the zero frequency; in the a -> 0 limit this is
    /// the Gaussian propagator of (1/2) Delta_x.
    pub fn zero_frequency_matrix(&self) -> &DenseMatrix {
        &self.matrices[self.matrix_of_freq[0]]
    }

    /// Conservative bound on the relative wrap-around mass picked up by
    /// periodizing the kernel onto the y-torus: the y-marginal decays at rate
    /// pi/(2t), so images a box-width away contribute about
    /// exp(-pi * y_extent / (2t)).
    pub fn wraparound_bound(&self) -> f64 {
        2.0 * (-std::f64::consts::PI * self.grid.y_extent / (2.0 * self.time)).exp()
    }
}

/// Signed frequency component for index `m` on an axis with `points` samples.
fn signed_index(m: usize, points: usize) -> i64 {
    if m <= points / 2 {
        m as i64
    } else {
        m as i64 - points as i64
    }
}

/// |xi| for the flat y-frequency index.
fn freq_magnitude(grid: &Grid, mut flat: usize) -> f64 {
    let mut sq = 0.0;
    for _ in 0..grid.y_dims {
        let m = flat % grid.y_points;
        flat /= grid.y_points;
        let j = signed_index(m, grid.y_points) as f64;
        let xi = std::f64::consts::PI * j / grid.y_extent;
        sq += xi * xi;
    }
    sq.sqrt()
}

/// Flat index of the mirrored (negated) frequency vector.
fn mirror_index(grid: &Grid, mut flat: usize) -> usize {
    let m = grid.y_points;
    let mut out = 0;
    let mut stride = 1;
    for _ in 0..grid.y_dims {
        let i = flat % m;
        flat /= m;
        out += ((m - i) % m) * stride;
        stride *= m;
    }
    out
}

/// Build the per-frequency Mehler matrices realizing S_G(t) on `grid`.
/// Deterministic for fixed inputs; matrices are shared between +/- xi.
pub fn build_propagator_bank(grid: &Grid, t: f64) -> Result<PropagatorBank> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(GrushinError::Domain(format!("propagator bank needs t > 0, got {t}")));
    }
    let ny = grid.y_count();
    let mut unique: BTreeMap<u64, usize> = BTreeMap::new();
    let mut matrix_of_freq = vec![0usize; ny];
    let mut freq_magnitudes = Vec::new();
    for iy in 0..ny {
        let mag = freq_magnitude(grid, iy);
        let next = unique.len();
        let idx = *unique.entry(mag.to_bits()).or_insert_with(|| {
            freq_magnitudes.push(mag);
            next
        });
        matrix_of_freq[iy] = idx;
    }
    let matrices: Result<Vec<DenseMatrix>> = freq_magnitudes
        .par_iter()
        .map(|&mag| {
            let kern = OscillatorKernel::new(mag, grid.x_dims, t)?;
            mehler_matrix(&kern, grid)
        })
        .collect();
    Ok(PropagatorBank {
        grid: *grid,
        time: t,
        freq_magnitudes,
        matrices: matrices?,
        matrix_of_freq,
    })
}

/// In-place DFT along every y-axis of the x-major data block.
fn fft_y_axes(data: &mut [Complex<f64>], grid: &Grid, forward: bool) {
    let nx = grid.x_count();
    let ny = grid.y_count();
    let m = grid.y_points;
    let fft = plan(m, forward);
    if grid.y_dims == 1 {
        data.par_chunks_exact_mut(ny).for_each(|row| {
            let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(row, &mut scratch);
        });
        return;
    }
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex::default(); m];
    for axis in 0..grid.y_dims {
        let stride = m.pow((grid.y_dims - 1 - axis) as u32);
        let outer = ny / (m * stride);
        for x in 0..nx {
            let base = x * ny;
            for hi in 0..outer {
                for lo in 0..stride {
                    let start = base + hi * m * stride + lo;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, &v) in line.iter().enumerate() {
                        data[start + j * stride] = v;
                    }
                }
            }
        }
    }
}

/// Apply the semigroup realized by `bank` to `phi`: forward DFT along y,
/// per-frequency Mehler matrix along x, inverse DFT. Input and output are
/// real; an imaginary residue above tolerance is a numerical failure.
pub fn apply_semigroup(bank: &PropagatorBank, phi: &Field) -> Result<Field> {
    if phi.grid() != &bank.grid {
        return Err(GrushinError::GridMismatch(
            "field grid does not match the propagator bank".into(),
        ));
    }
    phi.check_finite()?;
    let grid = &bank.grid;
    let nx = grid.x_count();
    let ny = grid.y_count();

    let mut data: Vec<Complex<f64>> =
        phi.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_y_axes(&mut data, grid, true);

    // frequency-major layout for the x-matvecs
    let mut spec = vec![Complex::<f64>::default(); nx * ny];
    for ix in 0..nx {
        for iy in 0..ny {
            spec[iy * nx + ix] = data[ix * ny + iy];
        }
    }

    // real input: spectra at +/- xi are conjugate and share a matrix, so only
    // canonical frequencies are multiplied and the mirror is conjugated
    let canonical: Vec<usize> =
        (0..ny).filter(|&iy| mirror_index(grid, iy) >= iy).collect();
    let results: Vec<(usize, Vec<f64>, Vec<f64>)> = canonical
        .par_iter()
        .map(|&iy| {
            let mat = &bank.matrices[bank.matrix_of_freq[iy]];
            let col = &spec[iy * nx..(iy + 1) * nx];
            let vr: Vec<f64> = col.iter().map(|c| c.re).collect();
            let vi: Vec<f64> = col.iter().map(|c| c.im).collect();
            let mut out_r = vec![0.0; nx];
            let mut out_i = vec![0.0; nx];
            mat.matvec2(&vr, &vi, &mut out_r, &mut out_i);
            (iy, out_r, out_i)
        })
        .collect();
    for (iy, out_r, out_i) in &results {
        let mirror = mirror_index(grid, *iy);
        for ix in 0..nx {
            spec[iy * nx + ix] = Complex::new(out_r[ix], out_i[ix]);
            if mirror != *iy {
                spec[mirror * nx + ix] = Complex::new(out_r[ix], -out_i[ix]);
            }
        }
    }

    for ix in 0..nx {
        for iy in 0..ny {
            data[ix * ny + iy] = spec[iy * nx + ix];
        }
    }
    fft_y_axes(&mut data, grid, false);

    let scale = 1.0 / ny as f64;
    let residue_scale = phi.max_abs().max(1e-300);
    let mut out = Vec::with_capacity(nx * ny);
    let mut max_imag = 0.0_f64;
    for c in &data {
        out.push(c.re * scale);
        max_imag = max_imag.max((c.im * scale).abs());
    }
    if max_imag > IMAG_RESIDUE_TOL * residue_scale {
        return Err(GrushinError::NumericalFailure(format!(
            "imaginary residue {max_imag:.3e} exceeds {IMAG_RESIDUE_TOL:.1e} x field scale"
        )));
    }
    Field::from_values(*grid, out)
}

/// ||S(t) phi - phi||_p for each t in `t_list`; decreases to zero as t -> 0+
/// for data resolved on the grid.
pub fn identity_approx_error(phi: &Field, p: f64, t_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let bank = build_propagator_bank(phi.grid(), t)?;
        let mut diff = apply_semigroup(&bank, phi)?;
        diff.axpy(-1.0, phi);
        out.push((t, crate::grid::lp_norm(&diff, p)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_nonpositive_time() {
        let grid = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        assert!(build_propagator_bank(&grid, 0.0).is_err());
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let grid = Grid::new(1, 1, 4.0, 8, 4.0, 8).unwrap();
        let other = Grid::new(1, 1, 4.0, 8, 4.0, 16).unwrap();
        let bank = build_propagator_bank(&grid, 0.5).unwrap();
        let phi = Field::zeros(other);
        assert!(matches!(
            apply_semigroup(&bank, &phi),
            Err(GrushinError::GridMismatch(_))
        ));
    }

    #[test]
    fn frequency_magnitudes_are_deduplicated() {
        let grid = Grid::new(1, 1, 4.0, 8, 6.0, 16).unwrap();
        let bank = build_propagator_bank(&grid, 0.5).unwrap();
        // 16-point axis has magnitudes 0..=8 -> 9 unique matrices
        assert_eq!(bank.matrices().len(), 9);
        assert_eq!(bank.matrix_of_freq().len(), 16);
        assert_eq!(bank.matrix_of_freq()[1], bank.matrix_of_freq()[15]);
    }

    #[test]
    fn mirror_index_is_an_involution() {
        let grid = Grid::new(1, 2, 4.0, 4, 4.0, 8).unwrap();
        for iy in 0..grid.y_count() {
            let m = mirror_index(&grid, iy);
            assert_eq!(mirror_index(&grid, m), iy);
            assert_relative_eq!(freq_magnitude(&grid, iy), freq_magnitude(&grid, m));
        }
    }

    #[test]
    fn matrix_entries_are_nonnegative() {
        let grid = Grid::new(1, 1, 6.0, 32, 6.0, 16).unwrap();
        let bank = build_propagator_bank(&grid, 0.7).unwrap();
        for m in bank.matrices() {
            assert!(m.data.iter().all(|&v| v >= -1e-14));
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = Grid::new(1, 1, 6.0, 16, 6.0, 16).unwrap();
        let bank = build_propagator_bank(&grid, 0.3).unwrap();
        let out = apply_semigroup(&bank, &Field::zeros(grid)).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn multi_axis_transform_round_trips() {
        let grid = Grid::new(1, 2, 4.0, 4, 4.0, 8).unwrap();
        let nx = grid.x_count();
        let ny = grid.y_count();
        let mut data: Vec<Complex<f64>> = (0..nx * ny)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), 0.0))
            .collect();
        let orig = data.clone();
        fft_y_axes(&mut data, &grid, true);
        fft_y_axes(&mut data, &grid, false);
        for (a, b) in data.iter().zip(&orig) {
            assert_relative_eq!(a.re / ny as f64, b.re, epsilon = 1e-12);
            assert!((a.im / ny as f64).abs() < 1e-12);
        }
    }
}
