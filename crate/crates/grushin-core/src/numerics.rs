//! Small numerical helpers shared across the crate: composite Gauss-Legendre
//! panels and least-squares line fits.

/// 8-point Gauss-Legendre abscissae on [-1, 1] (positive half).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_80,
    0.525_532_409_916_328_99,
    0.796_666_477_413_626_74,
    0.960_289_856_497_536_23,
];

/// 8-point Gauss-Legendre weights matching `GL8_X`.
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_98,
    0.313_706_645_877_887_29,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Integrate `f` over `[a, b]` with `panels` equal panels of 8-point
/// Gauss-Legendre each.
pub fn integrate_gl8<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let center = a + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for i in 0..4 {
            let dx = half * GL8_X[i];
            acc += GL8_W[i] * (f(center - dx) + f(center + dx));
        }
        total += acc * half;
    }
    total
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (slope, _) = linear_fit(xs, ys);
    slope
}

/// Least-squares fit `y = a + b x`, returned as `(b, a)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a line fit");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of log(v) against log(t); every entry must be positive.
pub fn fit_log_slope(ts: &[f64], vals: &[f64]) -> f64 {
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    least_squares_slope(&lx, &ly)
}

/// log(sinh(z)) without overflow for large z: z + log(1 - e^{-2z}) - log 2.
pub fn ln_sinh(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z < 1e-2 {
        // sinh z = z (1 + z^2/6 + z^4/120 + ...)
        z.ln() + (z * z / 6.0 + z * z * z * z / 120.0).ln_1p()
    } else {
        z + (-(-2.0 * z).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// coth(z) for z > 0, stable across the whole range.
pub fn coth(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z < 1e-2 {
        1.0 / z + z / 3.0 - z * z * z / 45.0
    } else {
        let e = (-2.0 * z).exp();
        1.0 + 2.0 * e / (1.0 - e)
    }
}

/// csch(z) for z > 0, stable across the whole range.
pub fn csch(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z < 1e-2 {
        1.0 / z - z / 6.0 + 7.0 * z * z * z / 360.0
    } else {
        let e = (-z).exp();
        2.0 * e / (1.0 - e * e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl8_integrates_polynomials_exactly() {
        // degree 15 is exact for 8-point Gauss-Legendre
        let val = integrate_gl8(|x| x.powi(14), -1.0, 1.0, 1);
        assert_relative_eq!(val, 2.0 / 15.0, max_relative = 1e-13);
    }

    #[test]
    fn gl8_composite_gaussian() {
        let val = integrate_gl8(|x| (-x * x).exp(), -8.0, 8.0, 32);
        assert_relative_eq!(val, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn slope_of_line_is_recovered() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert_relative_eq!(least_squares_slope(&xs, &ys), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn ln_sinh_matches_direct_eval() {
        for &z in &[1e-3, 0.5, 2.0, 30.0] {
            assert_relative_eq!(ln_sinh(z), z.sinh().ln(), max_relative = 1e-13);
        }
        // direct sinh overflows here; the log form must stay finite
        assert!(ln_sinh(800.0).is_finite());
    }

    #[test]
    fn hyperbolic_helpers_match_libm() {
        for &z in &[1e-4, 1e-2, 0.3, 5.0, 50.0] {
            assert_relative_eq!(coth(z), z.cosh() / z.sinh(), max_relative = 1e-12);
            assert_relative_eq!(csch(z), 1.0 / z.sinh(), max_relative = 1e-12);
        }
    }
}
