//! Constitutive functions of the phase-field model.

use serde::{Deserialize, Serialize};

/// Physical and nudging parameters. All quantities are dimensionless; the
/// nudging gains have units of inverse time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub rho: f64,
    pub re: f64,
    pub tau: f64,
    pub eps: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub lambda_e: f64,
    pub k_per: f64,
    pub eta_f: f64,
    pub eta_p: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub alpha_u: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub alpha_phi: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub alpha_psi: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Default for PhysicalParams {
    /// The droplet benchmark parameter set.
    fn default() -> Self {
        PhysicalParams {
            rho: 1.0,
            re: 3000.0,
            tau: 1e-4,
            eps: 5e-3,
            lambda: 1.0,
            gamma: 1.0,
            lambda_e: 0.5,
            k_per: 1.0,
            eta_f: 1e-2,
            eta_p: 1e-1,
            alpha_u: 1.0,
            alpha_phi: 1.0,
            alpha_psi: 1.0,
        }
    }
}

impl PhysicalParams {
    /// Checks the positivity requirements; returns the name of the first
    /// offending parameter.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("rho", self.rho),
            ("re", self.re),
            ("tau", self.tau),
            ("eps", self.eps),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("k_per", self.k_per),
            ("eta_f", self.eta_f),
            ("eta_p", self.eta_p),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let nonneg = [
            ("lambda_e", self.lambda_e),
            ("alpha_u", self.alpha_u),
            ("alpha_phi", self.alpha_phi),
            ("alpha_psi", self.alpha_psi),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        Ok(())
    }

    /// Same parameters with all nudging gains switched off.
    pub fn without_nudging(&self) -> Self {
        PhysicalParams {
            alpha_u: 0.0,
            alpha_phi: 0.0,
            alpha_psi: 0.0,
            ..self.clone()
        }
    }

    pub fn nudging_active(&self) -> bool {
        self.alpha_u != 0.0 || self.alpha_phi != 0.0 || self.alpha_psi != 0.0
    }

    /// Viscosity, `eta_p s + eta_f (1 - s)`.
    pub fn eta(&self, s: f64) -> f64 {
        self.eta_p * s + self.eta_f * (1.0 - s)
    }

    /// Elastic coefficient, `lambda_e (1 - s)`.
    pub fn nu(&self, s: f64) -> f64 {
        self.lambda_e * (1.0 - s)
    }

    pub fn nu_prime(&self, _s: f64) -> f64 {
        -self.lambda_e
    }

    /// Permeability; constant.
    pub fn kappa(&self, _s: f64) -> f64 {
        self.k_per
    }

    /// Resistance weight `eta(s) / kappa(s) * (1 - s)`.
    pub fn resistance(&self, s: f64) -> f64 {
        self.eta(s) / self.kappa(s) * (1.0 - s)
    }

    pub fn eta_bounds(&self) -> (f64, f64) {
        (self.eta_f.min(self.eta_p), self.eta_f.max(self.eta_p))
    }
}

/// Truncation to `[0, 1]`.
pub fn cap(s: f64) -> f64 {
    s.clamp(0.0, 1.0)
}

/// Double-well potential `4 s^2 (1 - s)^2`.
#[allow(non_snake_case)]
pub fn F(s: f64) -> f64 {
    let a = s * (1.0 - s);
    4.0 * a * a
}

/// Derivative of [`F`].
pub fn f(s: f64) -> f64 {
    8.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cap_examples() {
        assert_eq!(cap(0.5), 0.5);
        assert_eq!(cap(-0.3), 0.0);
        assert_eq!(cap(1.7), 1.0);
    }

    #[test]
    fn coefficient_values() {
        let p = PhysicalParams::default();
        assert!((p.eta(0.0) - 0.01).abs() < 1e-15);
        assert!((p.eta(1.0) - 0.1).abs() < 1e-15);
        assert_eq!(p.nu(1.0), 0.0);
        assert_eq!(p.nu(0.0), 0.5);
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(p.nu_prime(s), -0.5);
            assert_eq!(p.kappa(s), 1.0);
        }
        assert_eq!(p.resistance(1.0), 0.0);
    }

    #[test]
    fn potential_values() {
        assert_eq!(f(0.0), 0.0);
        assert_eq!(f(0.5), 0.0);
        assert_eq!(f(1.0), 0.0);
        assert_eq!(F(0.5), 0.25);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let d = 1e-5;
        for k in 0..=200 {
            let s = -0.5 + 2.0 * k as f64 / 200.0;
            let fd = (F(s + d) - F(s - d)) / (2.0 * d);
            assert!((f(s) - fd).abs() <= 1e-6, "s = {s}");
        }
    }

    #[test]
    fn potential_is_quartically_coercive() {
        for s in [-10.0, 10.0] {
            assert!(F(s) >= 0.5 * s * s * s * s);
        }
    }

    #[test]
    fn validation_rejects_nonpositive() {
        let mut p = PhysicalParams::default();
        assert!(p.validate().is_ok());
        p.tau = 0.0;
        assert!(p.validate().unwrap_err().contains("tau"));
        let mut p = PhysicalParams::default();
        p.alpha_u = -1.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn cap_idempotent_and_nonexpansive(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            prop_assert_eq!(cap(cap(a)), cap(a));
            prop_assert!((cap(a) - cap(b)).abs() <= (a - b).abs());
        }

        #[test]
        fn coefficients_admissible_on_unit_interval(s in 0.0f64..=1.0) {
            let p = PhysicalParams::default();
            let (lo, hi) = p.eta_bounds();
            prop_assert!(p.eta(s) >= lo - 1e-15 && p.eta(s) <= hi + 1e-15);
            prop_assert!(p.nu(s) >= 0.0 && p.nu(s) <= p.lambda_e);
            prop_assert!(F(s) >= 0.0);
        }
    }
}
