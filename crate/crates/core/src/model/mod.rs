//! The joint ZI-GEV model: a GEV-link infection model for susceptibles and a
//! logistic model for susceptibility.

pub mod data;
pub mod likelihood;
pub mod spec;

use serde::{Deserialize, Serialize};

pub use data::{Dataset, Susceptibility};
pub use likelihood::{evaluate, Family, LikelihoodEval, ParamLayout, ParamRole, ResponseLink};
pub use spec::{
    validate_spec, Covariate, CovariateKind, ExclusionCovariate, ExclusionSide, ModelSpec,
    ValidationReport, INTERCEPT,
};

use crate::error::{Error, Result};
use crate::gev::{logistic, response_prob, GevLink, Probability, DEFAULT_TAU_BOUND};

/// `psi = (beta, theta, tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: f64,
}

impl ParamVector {
    pub fn new(beta: Vec<f64>, theta: Vec<f64>, tau: f64) -> Result<Self> {
        let psi = Self { beta, theta, tau };
        psi.validate(DEFAULT_TAU_BOUND)?;
        Ok(psi)
    }

    pub fn validate(&self, tau_bound: f64) -> Result<()> {
        if self.beta.is_empty() || self.theta.is_empty() {
            return Err(Error::Domain("beta and theta must be nonempty".into()));
        }
        if self.beta.iter().chain(&self.theta).any(|v| !v.is_finite()) {
            return Err(Error::Domain("parameter entries must be finite".into()));
        }
        GevLink::with_bound(self.tau, tau_bound)?;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.beta.len() + self.theta.len() + 1
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(Family::ZI_GEV, self.beta.len(), self.theta.len())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.k());
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.theta);
        v.push(self.tau);
        v
    }

    pub fn from_flat(p: usize, q: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != p + q + 1 {
            return Err(Error::Dimension {
                what: "flat parameter vector",
                expected: p + q + 1,
                got: flat.len(),
            });
        }
        Ok(Self {
            beta: flat[..p].to_vec(),
            theta: flat[p..p + q].to_vec(),
            tau: flat[p + q],
        })
    }

    pub fn link(&self) -> Result<GevLink> {
        GevLink::new(self.tau)
    }
}

fn dot(a: &[f64], b: &[f64], what: &'static str) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            what,
            expected: b.len(),
            got: a.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(u, v)| u * v).sum())
}

/// `P(Y = 1 | x, z) = pi(x'beta; tau) * logistic(z'theta)`.
pub fn joint_prob(x_row: &[f64], z_row: &[f64], psi: &ParamVector) -> Result<Probability> {
    let eta = dot(x_row, &psi.beta, "x row")?;
    let a = dot(z_row, &psi.theta, "z row")?;
    let pi = response_prob(eta, &psi.link()?)?;
    Probability::new(pi.value() * logistic(a).value())
}

/// Log-likelihood of the ZI-GEV model.
pub fn log_likelihood(psi: &ParamVector, data: &Dataset) -> Result<f64> {
    Ok(evaluate(&psi.layout(), &psi.to_flat(), data, false)?.log_likelihood)
}

/// Analytic gradient of [`log_likelihood`] in `(beta, theta, tau)` order.
///
/// Fails with [`Error::BoundaryRow`] when some row sits on the support
/// boundary of the link, where the derivative is not defined.
pub fn score(psi: &ParamVector, data: &Dataset) -> Result<Vec<f64>> {
    let eval = evaluate(&psi.layout(), &psi.to_flat(), data, true)?;
    if let Some(&row) = eval.boundary_rows.first() {
        return Err(Error::BoundaryRow { row });
    }
    Ok(eval.gradient.expect("gradient requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn joint_prob_examples() {
        let psi = ParamVector::new(vec![1.5379, -0.1003], vec![-0.3667], 4.278).unwrap();
        let p = joint_prob(&[1.0, 15.0], &[1.0], &psi).unwrap();
        assert_abs_diff_eq!(p.value(), 0.264, epsilon = 1e-3);

        let psi = ParamVector::new(vec![0.0], vec![0.0], 0.3).unwrap();
        let p = joint_prob(&[1.0], &[1.0], &psi).unwrap();
        assert_abs_diff_eq!(p.value(), (1.0 - (-1.0f64).exp()) * 0.5, epsilon = 1e-15);

        let psi = ParamVector::new(vec![0.0], vec![-800.0], 0.3).unwrap();
        assert_eq!(joint_prob(&[1.0], &[1.0], &psi).unwrap().value(), 0.0);

        assert!(joint_prob(&[1.0, 2.0], &[1.0], &psi).is_err());
    }

    #[test]
    fn single_row_log_likelihood() {
        // pi(eta) * s = 0.5 with s = 1/2 needs pi = 1: use a boundary row.
        let data = Dataset::new(vec![1], array![[1.0, 10.0]], array![[1.0]]).unwrap();
        let psi = ParamVector::new(vec![0.0, 1.0], vec![0.0], 0.5).unwrap();
        assert_abs_diff_eq!(
            log_likelihood(&psi, &data).unwrap(),
            (0.5f64).ln(),
            epsilon = 1e-15
        );
        assert!(matches!(score(&psi, &data), Err(Error::BoundaryRow { row: 0 })));
    }

    #[test]
    fn saturated_cure_part_pushes_theta_up() {
        let data = Dataset::new(
            vec![1, 1, 1],
            array![[1.0, 0.1], [1.0, -0.4], [1.0, 0.9]],
            array![[1.0, 0.3], [1.0, -1.0], [1.0, 2.0]],
        )
        .unwrap();
        let psi = ParamVector::new(vec![0.2, 0.5], vec![4.0, 1.0], 0.2).unwrap();
        let g = score(&psi, &data).unwrap();
        assert!(g[2] > 0.0);
    }

    #[test]
    fn flat_round_trip() {
        let psi = ParamVector::new(vec![1.0, 2.0], vec![3.0], 0.4).unwrap();
        assert_eq!(ParamVector::from_flat(2, 1, &psi.to_flat()).unwrap(), psi);
        assert!(ParamVector::from_flat(2, 2, &psi.to_flat()).is_err());
        assert!(ParamVector::new(vec![1.0], vec![0.0], 30.0).is_err());
    }

    #[test]
    fn layout_names() {
        let layout = ParamLayout::new(Family::ZI_GEV, 2, 1);
        let names = layout.names(
            &["(Intercept)".to_string(), "Weight".to_string()],
            &["(Intercept)".to_string()],
        );
        assert_eq!(names, vec!["beta:(Intercept)", "beta:Weight", "theta:(Intercept)", "tau"]);
        let naive = ParamLayout::new(Family::LOGISTIC, 2, 5);
        assert_eq!(naive.dim(), 2);
        assert_eq!(naive.tau_index(), None);
    }
}
