//! Model parameters for the semilinear problem u_t = Delta_G u + lambda
//! |u|^{rho-1} u and the local/critical regime classifier.

use crate::error::{GrushinError, Result};
use crate::grid::Field;
use serde::{Deserialize, Serialize};

/// Width of the tie window around the critical index: |p - Q(rho-1)/2| below
/// this classifies as critical (the global small-data theory is stated at
/// equality).
const CRITICAL_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dimension N of the x-block.
    pub x_dims: usize,
    /// Dimension k of the y-block.
    pub y_dims: usize,
    /// Nonlinearity exponent rho > 1.
    pub rho: f64,
    /// Lebesgue index p >= 1 of the data space.
    pub p: f64,
    /// Auxiliary Lebesgue index r in (p, rho*p]; defaults to rho*p, which is
    /// the weighted-space index of the local theory. The critical regime
    /// requires r strictly inside (p, rho*p).
    #[serde(default)]
    pub r: Option<f64>,
    /// Multiplier on the source term; 0 switches the nonlinearity off.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(x_dims: usize, y_dims: usize, rho: f64, p: f64) -> Result<Self> {
        let params = ModelParams { x_dims, y_dims, rho, p, r: None, lambda: 1.0 };
        params.validate()?;
        Ok(params)
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_dims == 0 || self.y_dims == 0 {
            return Err(GrushinError::InvalidParams("dimensions N and k must be >= 1".into()));
        }
        if !(self.rho > 1.0) {
            return Err(GrushinError::InvalidParams(format!("rho must exceed 1, got {}", self.rho)));
        }
        if !(self.p >= 1.0) {
            return Err(GrushinError::InvalidParams(format!("p must be >= 1, got {}", self.p)));
        }
        if let Some(r) = self.r {
            if !(r > self.p) || !(r <= self.rho * self.p) {
                return Err(GrushinError::InvalidParams(format!(
                    "r must lie in (p, rho*p] = ({}, {}], got {r}",
                    self.p,
                    self.rho * self.p
                )));
            }
        }
        if !self.lambda.is_finite() {
            return Err(GrushinError::InvalidParams("lambda must be finite".into()));
        }
        Ok(())
    }

    /// Homogeneous dimension Q = N + 2k.
    pub fn homogeneous_dim(&self) -> f64 {
        (self.x_dims + 2 * self.y_dims) as f64
    }

    /// The critical Lebesgue index Q(rho - 1)/2.
    pub fn critical_p(&self) -> f64 {
        self.homogeneous_dim() * (self.rho - 1.0) / 2.0
    }

    /// The auxiliary index, defaulting to rho*p.
    pub fn r_index(&self) -> f64 {
        self.r.unwrap_or(self.rho * self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// p > Q(rho-1)/2: local existence with the weighted norm exponent
    /// alpha = Q(rho-1)/(2 rho p).
    SubcriticalLocal,
    /// p = Q(rho-1)/2: global existence for small data, with
    /// alpha = (Q/2)(1/p - 1/r) for a configured r in (p, rho p).
    CriticalGlobalSmallData,
    /// Neither hypothesis holds.
    HypothesesViolated,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SubcriticalLocal => "subcritical-local",
            Regime::CriticalGlobalSmallData => "critical-global-small-data",
            Regime::HypothesesViolated => "hypotheses-violated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Weighted-norm exponent for the applicable regime (0 when violated).
    pub alpha: f64,
    /// The critical index Q(rho-1)/2.
    pub critical_p: f64,
    pub alpha_rho: f64,
    /// Sign of 1 - alpha*rho: positive means the contraction window is open.
    pub one_minus_alpha_rho_sign: i8,
}

/// Classify the parameters against the existence hypotheses. Total: never
/// fails, ties at the critical index go to the critical regime.
pub fn regime_classify(params: &ModelParams) -> RegimeReport {
    let q_half = params.homogeneous_dim() / 2.0;
    let critical_p = params.critical_p();
    let scale = critical_p.abs().max(params.p.abs()).max(1.0);

    let (regime, alpha) = if (params.p - critical_p).abs() <= CRITICAL_TIE * scale {
        let r = params.r_index();
        // the critical theory needs r strictly between p and rho*p
        if r > params.p && r < params.rho * params.p {
            (Regime::CriticalGlobalSmallData, q_half * (1.0 / params.p - 1.0 / r))
        } else {
            (Regime::HypothesesViolated, 0.0)
        }
    } else if params.p > critical_p {
        (Regime::SubcriticalLocal, q_half * (params.rho - 1.0) / (params.rho * params.p))
    } else {
        (Regime::HypothesesViolated, 0.0)
    };

    let alpha_rho = alpha * params.rho;
    RegimeReport {
        regime,
        alpha,
        critical_p,
        alpha_rho,
        one_minus_alpha_rho_sign: if 1.0 - alpha_rho > 0.0 {
            1
        } else if 1.0 - alpha_rho < 0.0 {
            -1
        } else {
            0
        },
    }
}

/// Pointwise source term lambda |u|^{rho-1} u. Odd in u and sign-preserving.
pub fn nonlinearity(u: &Field, rho: f64, lambda: f64) -> Field {
    let mut out = u.clone();
    apply_nonlinearity(out.values_mut(), rho, lambda);
    out
}

pub(crate) fn apply_nonlinearity(values: &mut [f64], rho: f64, lambda: f64) {
    debug_assert!(rho > 1.0);
    if lambda == 0.0 {
        values.fill(0.0);
        return;
    }
    for v in values {
        *v = lambda * v.abs().powf(rho - 1.0) * *v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn subcritical_example() {
        let params = ModelParams::new(1, 1, 2.0, 2.0).unwrap();
        let report = regime_classify(&params);
        assert_eq!(report.regime, Regime::SubcriticalLocal);
        assert_relative_eq!(report.alpha, 3.0 / 8.0);
        assert_relative_eq!(report.alpha_rho, 3.0 / 4.0);
        assert_eq!(report.one_minus_alpha_rho_sign, 1);
    }

    #[test]
    fn critical_example() {
        let params = ModelParams::new(1, 1, 3.0, 3.0).unwrap().with_r(4.0);
        let report = regime_classify(&params);
        assert_eq!(report.regime, Regime::CriticalGlobalSmallData);
        assert_relative_eq!(report.alpha, 1.0 / 8.0);
        assert_relative_eq!(report.critical_p, 3.0);
    }

    #[test]
    fn violated_example() {
        let params = ModelParams::new(1, 1, 2.0, 1.0).unwrap();
        let report = regime_classify(&params);
        assert_eq!(report.regime, Regime::HypothesesViolated);
        assert_relative_eq!(report.critical_p, 1.5);
    }

    #[test]
    fn boundary_tie_goes_to_critical() {
        // p within 1e-12 of Q(rho-1)/2 on either side classifies critical
        for eps in [-1e-13, 0.0, 1e-13] {
            let params = ModelParams::new(1, 1, 3.0, 3.0 + eps).unwrap().with_r(4.0);
            let report = regime_classify(&params);
            assert_eq!(report.regime, Regime::CriticalGlobalSmallData, "eps = {eps}");
        }
    }

    #[test]
    fn critical_without_valid_r_is_violated() {
        // default r = rho*p sits on the boundary, which the critical theory excludes
        let params = ModelParams::new(1, 1, 3.0, 3.0).unwrap();
        assert_eq!(regime_classify(&params).regime, Regime::HypothesesViolated);
    }

    #[test]
    fn nonlinearity_point_values() {
        let g = Grid::new(1, 1, 1.0, 4, 1.0, 4).unwrap();
        let mut f = Field::zeros(g);
        f.values_mut()[0] = -2.0;
        let out = nonlinearity(&f, 2.0, 1.0);
        assert_relative_eq!(out.values()[0], -4.0);
        assert_eq!(out.values()[1], 0.0);
    }

    proptest! {
        #[test]
        fn nonlinearity_is_odd_and_sign_preserving(v in -50.0_f64..50.0, rho in 1.05_f64..4.0) {
            let mut a = [v];
            let mut b = [-v];
            apply_nonlinearity(&mut a, rho, 1.0);
            apply_nonlinearity(&mut b, rho, 1.0);
            prop_assert!((a[0] + b[0]).abs() <= 1e-12 * a[0].abs().max(1e-300));
            prop_assert!(a[0] * v >= 0.0);
        }
    }

    #[test]
    fn nonlinearity_lipschitz_bound_on_random_pairs() {
        // |F(a) - F(b)| <= rho max(|a|,|b|)^{rho-1} |a - b|, sampled brute force
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for &rho in &[1.5, 2.0, 3.0] {
            for _ in 0..10_000 {
                let a = 20.0 * (next() - 0.5);
                let b = 20.0 * (next() - 0.5);
                let fa = a.abs().powf(rho - 1.0) * a;
                let fb = b.abs().powf(rho - 1.0) * b;
                let bound = rho * a.abs().max(b.abs()).powf(rho - 1.0) * (a - b).abs();
                assert!(
                    (fa - fb).abs() <= bound * (1.0 + 1e-12) + 1e-300,
                    "rho={rho} a={a} b={b}"
                );
            }
        }
    }
}
