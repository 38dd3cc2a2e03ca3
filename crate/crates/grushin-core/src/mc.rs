//! Independent stochastic validation of the kernel: Euler-Maruyama paths of
//! the Grushin diffusion dX = dB (N-dimensional), dY = |X| dW (k-dimensional),
//! whose transition density is K(x, x0, y - y0; t).
//!
//! The diffusion coefficient is |X| rather than X so the generator is
//! (1/2)(Delta_x + |x|^2 Delta_y) in every dimension; only |x|^2 enters the
//! law of the y-block either way.

use crate::error::{GrushinError, Result};
use crate::kernel::{kernel_point, KernelQuadrature};
use crate::params::ModelParams;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Paths per deterministic substream block; blocks are merged in index
/// order, so results do not depend on the thread count.
const PATHS_PER_BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_mc_dt")]
    pub dt: f64,
    pub seed: u64,
    /// Start point of the x-block; the y-block starts at the origin.
    pub x0: Vec<f64>,
}

fn default_paths() -> usize {
    1_000_000
}
fn default_mc_dt() -> f64 {
    1e-3
}

impl McConfig {
    pub fn new(paths: usize, dt: f64, seed: u64, x0: Vec<f64>) -> Result<Self> {
        let cfg = McConfig { paths, dt, seed, x0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 1000 {
            return Err(GrushinError::InvalidParams(format!(
                "need at least 1000 paths, got {}",
                self.paths
            )));
        }
        if !(self.dt > 0.0) {
            return Err(GrushinError::InvalidParams("mc dt must be positive".into()));
        }
        Ok(())
    }
}

/// Terminal samples (X_t, Y_t), stored flat: `x` is paths x N, `y` is
/// paths x k.
#[derive(Debug, Clone)]
pub struct McSample {
    pub paths: usize,
    pub x_dims: usize,
    pub y_dims: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub time: f64,
}

/// Advance `paths` independent Euler-Maruyama paths to time t. X moves by
/// Gaussian increments of variance dt per coordinate; Y by |X| (taken at the
/// left endpoint of each step) times independent Gaussian increments.
/// Reproducible: path blocks draw from substreams derived from the seed.
pub fn simulate_paths(params: &ModelParams, mc: &McConfig, t: f64) -> Result<McSample> {
    mc.validate()?;
    if !(t > 0.0) {
        return Err(GrushinError::Domain(format!("simulation needs t > 0, got {t}")));
    }
    if mc.dt > t / 100.0 {
        return Err(GrushinError::InvalidParams(format!(
            "mc dt = {} must be at most t/100 = {}",
            mc.dt,
            t / 100.0
        )));
    }
    let n = params.x_dims;
    let k = params.y_dims;
    if mc.x0.len() != n {
        return Err(GrushinError::InvalidParams(format!(
            "x0 has {} coordinates, expected N = {n}",
            mc.x0.len()
        )));
    }
    let steps = (t / mc.dt).ceil() as usize;
    let dt = t / steps as f64;
    let sqrt_dt = dt.sqrt();

    let blocks = mc.paths.div_ceil(PATHS_PER_BLOCK);
    let per_block: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * PATHS_PER_BLOCK;
            let hi = (lo + PATHS_PER_BLOCK).min(mc.paths);
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(block as u64 + 1);
            let mut xs = Vec::with_capacity((hi - lo) * n);
            let mut ys = Vec::with_capacity((hi - lo) * k);
            let mut x = vec![0.0_f64; n];
            let mut y = vec![0.0_f64; k];
            for _ in lo..hi {
                x.copy_from_slice(&mc.x0);
                y.fill(0.0);
                for _ in 0..steps {
                    let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for xi in x.iter_mut() {
                        let g: f64 = rng.sample(StandardNormal);
                        *xi += sqrt_dt * g;
                    }
                    for yi in y.iter_mut() {
                        let g: f64 = rng.sample(StandardNormal);
                        *yi += x_norm * sqrt_dt * g;
                    }
                }
                xs.extend_from_slice(&x);
                ys.extend_from_slice(&y);
            }
            (xs, ys)
        })
        .collect();

    let mut x = Vec::with_capacity(mc.paths * n);
    let mut y = Vec::with_capacity(mc.paths * k);
    for (bx, by) in per_block {
        x.extend(bx);
        y.extend(by);
    }
    Ok(McSample { paths: mc.paths, x_dims: n, y_dims: k, x, y, time: t })
}

/// Empirical means and squared-norm moments with standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub se_mean_x: Vec<f64>,
    pub se_mean_y: Vec<f64>,
    /// E |X_t|^2 and its standard error.
    pub x_sq: f64,
    pub se_x_sq: f64,
    /// E |Y_t|^2 and its standard error.
    pub y_sq: f64,
    pub se_y_sq: f64,
    /// Martingale expectations: E X_t = x0, E Y_t = 0,
    /// E |X_t|^2 = |x0|^2 + N t, E |Y_t|^2 = k (|x0|^2 t + N t^2 / 2).
    pub expected_x_sq: f64,
    pub expected_y_sq: f64,
}

pub fn moment_summary(sample: &McSample, x0: &[f64]) -> MomentReport {
    let n = sample.x_dims;
    let k = sample.y_dims;
    let paths = sample.paths as f64;
    let t = sample.time;

    let mut mean_x = vec![0.0; n];
    let mut m2_x = vec![0.0; n];
    for row in sample.x.chunks_exact(n) {
        for (i, &v) in row.iter().enumerate() {
            mean_x[i] += v;
            m2_x[i] += v * v;
        }
    }
    let mut mean_y = vec![0.0; k];
    let mut m2_y = vec![0.0; k];
    for row in sample.y.chunks_exact(k) {
        for (i, &v) in row.iter().enumerate() {
            mean_y[i] += v;
            m2_y[i] += v * v;
        }
    }
    for v in mean_x.iter_mut().chain(mean_y.iter_mut()) {
        *v /= paths;
    }
    let se_mean_x: Vec<f64> = (0..n)
        .map(|i| ((m2_x[i] / paths - mean_x[i] * mean_x[i]).max(0.0) / paths).sqrt())
        .collect();
    let se_mean_y: Vec<f64> = (0..k)
        .map(|i| ((m2_y[i] / paths - mean_y[i] * mean_y[i]).max(0.0) / paths).sqrt())
        .collect();

    let (mut s1x, mut s2x) = (0.0, 0.0);
    for row in sample.x.chunks_exact(n) {
        let q = row.iter().map(|v| v * v).sum::<f64>();
        s1x += q;
        s2x += q * q;
    }
    let (mut s1y, mut s2y) = (0.0, 0.0);
    for row in sample.y.chunks_exact(k) {
        let q = row.iter().map(|v| v * v).sum::<f64>();
        s1y += q;
        s2y += q * q;
    }
    let x_sq = s1x / paths;
    let y_sq = s1y / paths;
    let x0_sq = x0.iter().map(|v| v * v).sum::<f64>();
    MomentReport {
        mean_x,
        mean_y,
        se_mean_x,
        se_mean_y,
        x_sq,
        se_x_sq: ((s2x / paths - x_sq * x_sq).max(0.0) / paths).sqrt(),
        y_sq,
        se_y_sq: ((s2y / paths - y_sq * y_sq).max(0.0) / paths).sqrt(),
        expected_x_sq: x0_sq + n as f64 * t,
        expected_y_sq: k as f64 * (x0_sq * t + n as f64 * t * t / 2.0),
    }
}

/// L1 distance between the normalized 2D (x, y) histogram of the samples and
/// the kernel integrated over the bins (N = k = 1). The histogram box spans
/// six analytic standard deviations and must cover at least 99.9% of the
/// samples.
pub fn density_compare(
    params: &ModelParams,
    quad: &KernelQuadrature,
    sample: &McSample,
    x0: &[f64],
    bins: usize,
) -> Result<f64> {
    if sample.x_dims != 1 || sample.y_dims != 1 {
        return Err(GrushinError::InvalidParams(
            "density_compare is implemented for N = k = 1".into(),
        ));
    }
    if bins < 4 {
        return Err(GrushinError::InvalidParams("need at least 4 bins per axis".into()));
    }
    let t = sample.time;
    let x0_sq = x0.iter().map(|v| v * v).sum::<f64>();
    let sigma_x = (params.x_dims as f64 * t).sqrt();
    let sigma_y = (x0_sq * t + params.x_dims as f64 * t * t / 2.0).sqrt();
    let (x_lo, x_hi) = (x0[0] - 6.0 * sigma_x, x0[0] + 6.0 * sigma_x);
    let (y_lo, y_hi) = (-6.0 * sigma_y, 6.0 * sigma_y);
    let hx = (x_hi - x_lo) / bins as f64;
    let hy = (y_hi - y_lo) / bins as f64;

    let mut counts = vec![0.0_f64; bins * bins];
    let mut inside = 0usize;
    for (xv, yv) in sample.x.iter().zip(&sample.y) {
        let bx = ((xv - x_lo) / hx).floor();
        let by = ((yv - y_lo) / hy).floor();
        if bx >= 0.0 && bx < bins as f64 && by >= 0.0 && by < bins as f64 {
            counts[bx as usize * bins + by as usize] += 1.0;
            inside += 1;
        }
    }
    let coverage = inside as f64 / sample.paths as f64;
    if coverage < 0.999 {
        return Err(GrushinError::DomainTooSmall(format!(
            "histogram box covers only {coverage:.4} of the samples"
        )));
    }

    // model probability per bin: 2x2 Gauss-Legendre nodes per bin
    let gl = 0.5_f64 / 3.0_f64.sqrt();
    let offsets = [0.5 - gl, 0.5 + gl];
    let model: Result<Vec<f64>> = (0..bins * bins)
        .into_par_iter()
        .map(|b| {
            let ix = b / bins;
            let iy = b % bins;
            let mut acc = 0.0;
            for ox in offsets {
                for oy in offsets {
                    let x = x_lo + (ix as f64 + ox) * hx;
                    let y = y_lo + (iy as f64 + oy) * hy;
                    acc += kernel_point(params, quad, &[x], x0, &[y], t)?;
                }
            }
            Ok(acc / 4.0 * hx * hy)
        })
        .collect();
    let model = model?;

    let n = sample.paths as f64;
    let mut l1 = 0.0;
    for (c, m) in counts.iter().zip(&model) {
        l1 += (c / n - m).abs();
    }
    Ok(l1)
}

/// L1 distance between the x-marginal histogram and the analytic Gaussian
/// marginal (2 pi t)^{-1/2} exp(-(x - x0)^2 / (2t)) of the x-block (exact:
/// X_t is Brownian motion started at x0).
pub fn x_marginal_distance(sample: &McSample, x0: f64, bins: usize) -> Result<f64> {
    if sample.x_dims != 1 {
        return Err(GrushinError::InvalidParams(
            "x_marginal_distance is implemented for N = 1".into(),
        ));
    }
    let t = sample.time;
    let sigma = t.sqrt();
    let (lo, hi) = (x0 - 6.0 * sigma, x0 + 6.0 * sigma);
    let h = (hi - lo) / bins as f64;
    let mut counts = vec![0.0_f64; bins];
    for &xv in &sample.x {
        let b = ((xv - lo) / h).floor();
        if b >= 0.0 && b < bins as f64 {
            counts[b as usize] += 1.0;
        }
    }
    let density = |x: f64| {
        (2.0 * std::f64::consts::PI * t).powf(-0.5) * (-(x - x0) * (x - x0) / (2.0 * t)).exp()
    };
    let n = sample.paths as f64;
    let mut l1 = 0.0;
    for (b, c) in counts.iter().enumerate() {
        let p = crate::numerics::integrate_gl8(
            density,
            lo + b as f64 * h,
            lo + (b as f64 + 1.0) * h,
            1,
        );
        l1 += (c / n - p).abs();
    }
    Ok(l1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(McConfig::new(500, 1e-3, 1, vec![0.0]).is_err());
        assert!(McConfig::new(2000, 0.0, 1, vec![0.0]).is_err());
        assert!(McConfig::new(2000, 1e-3, 1, vec![0.0]).is_ok());
    }

    #[test]
    fn dt_must_resolve_the_horizon() {
        let params = ModelParams::new(1, 1, 2.0, 2.0).unwrap();
        let mc = McConfig::new(2000, 0.05, 1, vec![0.0]).unwrap();
        assert!(matches!(
            simulate_paths(&params, &mc, 1.0),
            Err(GrushinError::InvalidParams(_))
        ));
    }

    #[test]
    fn identical_seeds_reproduce_samples() {
        let params = ModelParams::new(1, 1, 2.0, 2.0).unwrap();
        let mc = McConfig::new(2000, 1e-3, 42, vec![1.0]).unwrap();
        let a = simulate_paths(&params, &mc, 0.2).unwrap();
        let b = simulate_paths(&params, &mc, 0.2).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
        let other = McConfig::new(2000, 1e-3, 43, vec![1.0]).unwrap();
        let c = simulate_paths(&params, &other, 0.2).unwrap();
        assert_ne!(a.x, c.x);
    }
}
