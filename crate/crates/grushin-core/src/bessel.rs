//! Bessel functions J_nu for the radial Fourier reduction over the y-block:
//! the orders that occur are nu = k/2 - 1 for k >= 2, i.e. 0, 1/2, 1, 3/2, ...
//!
//! Small arguments use the ascending power series, large arguments the Hankel
//! asymptotic expansion; the split point keeps both sides near full double
//! precision for the small orders used here.

/// Series/asymptotic split point.
const SPLIT: f64 = 14.0;

/// Lanczos g = 7, n = 9 coefficients for ln Gamma.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// J_nu(z) for nu >= 0 and z >= 0.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    debug_assert!(nu >= 0.0);
    debug_assert!(z >= 0.0);
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if z <= SPLIT {
        series(nu, z)
    } else {
        asymptotic(nu, z)
    }
}

/// Ascending series sum_m (-1)^m (z/2)^{nu+2m} / (m! Gamma(nu+m+1)).
fn series(nu: f64, z: f64) -> f64 {
    let half = 0.5 * z;
    let ln_half = half.ln();
    // leading term (z/2)^nu / Gamma(nu+1)
    let mut term = (nu * ln_half - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let z2 = half * half;
    for m in 1..200 {
        let m = m as f64;
        term *= -z2 / (m * (nu + m));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-280) {
            break;
        }
    }
    sum
}

/// Hankel expansion: J_nu(z) ~ sqrt(2/(pi z)) (P cos w - Q sin w),
/// w = z - nu pi/2 - pi/4.
fn asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..30 {
        let j = j as f64;
        term *= (mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (j * 8.0 * z);
        if term.abs() > prev {
            break; // divergent tail of the asymptotic series
        }
        prev = term.abs();
        match (j as usize) % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let w = z - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * w.cos() - q * w.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(5.0), 24.0_f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn integer_order_table_values() {
        assert_relative_eq!(bessel_j(0.0, 1.0), 0.765_197_686_557_966_6, max_relative = 1e-12);
        assert_relative_eq!(bessel_j(0.0, 5.0), -0.177_596_771_314_338_3, max_relative = 1e-11);
        assert_relative_eq!(bessel_j(0.0, 20.0), 0.167_024_664_340_583_2, max_relative = 1e-11);
        assert_relative_eq!(bessel_j(1.0, 1.0), 0.440_050_585_744_933_5, max_relative = 1e-12);
        assert_relative_eq!(bessel_j(1.0, 5.0), -0.327_579_137_591_465_2, max_relative = 1e-11);
        assert_relative_eq!(bessel_j(1.0, 20.0), 0.066_833_124_175_849_91, max_relative = 1e-10);
        assert_relative_eq!(bessel_j(2.0, 1.0), 0.114_903_484_931_900_48, max_relative = 1e-12);
    }

    #[test]
    fn half_order_matches_spherical_forms() {
        // J_{1/2}(z) = sqrt(2/(pi z)) sin z, J_{3/2}(z) = sqrt(2/(pi z)) (sin z / z - cos z)
        for &z in &[0.3, 1.0, 4.0, 13.0, 15.0, 40.0] {
            let c = (2.0 / (std::f64::consts::PI * z)).sqrt();
            assert_relative_eq!(bessel_j(0.5, z), c * z.sin(), max_relative = 1e-10, epsilon = 1e-13);
            assert_relative_eq!(
                bessel_j(1.5, z),
                c * (z.sin() / z - z.cos()),
                max_relative = 1e-10,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn series_and_asymptotic_agree_at_the_split() {
        for &nu in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let a = series(nu, SPLIT);
            let b = asymptotic(nu, SPLIT);
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-11);
        }
    }
}
