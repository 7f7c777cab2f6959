use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

use super::FitResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldResult {
    pub coefficient: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub z: f64,
    /// Two-sided p-value against the standard normal.
    pub p_value: f64,
}

impl WaldResult {
    pub fn new(coefficient: impl Into<String>, estimate: f64, standard_error: f64) -> Self {
        let z = estimate / standard_error;
        Self {
            coefficient: coefficient.into(),
            estimate,
            standard_error,
            z,
            p_value: two_sided_p(z),
        }
    }
}

/// `2 * (1 - Phi(|z|))`, evaluated as `erfc(|z| / sqrt 2)`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Wald test of `coefficient = 0`.
pub fn wald_test(fit: &FitResult, coefficient: &str) -> Result<WaldResult> {
    let j = fit
        .coefficient_index(coefficient)
        .ok_or_else(|| Error::UnknownName {
            kind: "coefficient",
            name: coefficient.to_string(),
            known: fit.names.join(", "),
        })?;
    let se = fit.standard_errors[j]
        .filter(|s| *s > 0.0)
        .ok_or_else(|| Error::SeUnavailable(fit.names[j].clone()))?;
    Ok(WaldResult::new(fit.names[j].clone(), fit.estimates[j], se))
}

/// `2k - 2 loglik`.
pub fn aic_value(log_likelihood: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}

pub fn aic(fit: &FitResult) -> f64 {
    fit.aic
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_examples() {
        let w = WaldResult::new("b", 0.0, 1.0);
        assert_eq!(w.z, 0.0);
        assert!((w.p_value - 1.0).abs() < 1e-15);

        let w = WaldResult::new("beta:Weight", -0.1003, 0.0006);
        assert!((w.z + 167.1667).abs() < 1e-3);
        assert!(w.p_value < 1e-15);

        let w = WaldResult::new("b", 1.96, 1.0);
        assert!((w.p_value - 0.05).abs() < 5e-4);
        assert_eq!(WaldResult::new("b", -1.96, 1.0).p_value, w.p_value);
    }

    #[test]
    fn aic_examples() {
        assert!((aic_value(-217.107, 4) - 442.214).abs() < 1e-9);
        assert_eq!(aic_value(0.0, 0), 0.0);
        assert_eq!(aic_value(-10.0, 3) - aic_value(-10.0, 2), 2.0);
    }
}
