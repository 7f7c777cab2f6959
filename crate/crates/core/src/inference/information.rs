//! Observed information by central differences of the analytic score.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{evaluate, Dataset};

use super::FitResult;

/// Relative step for differencing the score.
pub const HESSIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationSummary {
    /// One entry per parameter; `None` for fixed parameters or when the
    /// information matrix is not positive definite.
    pub standard_errors: Vec<Option<f64>>,
    pub min_eigenvalue: Option<f64>,
}

/// Negative Hessian of a log-likelihood, from central differences of its
/// gradient `score`, symmetrized.
pub fn observed_information<F>(score: F, at: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let k = at.len();
    let mut hess = DMatrix::<f64>::zeros(k, k);
    let mut x = at.to_vec();
    for j in 0..k {
        let h = HESSIAN_STEP * at[j].abs().max(1.0);
        x[j] = at[j] + h;
        let up = score(&x);
        x[j] = at[j] - h;
        let down = score(&x);
        x[j] = at[j];
        for i in 0..k {
            hess[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    -sym
}

/// Square roots of the diagonal of the inverse information. All entries are
/// unavailable when the matrix is not positive definite.
pub fn standard_errors_from_information(info: &DMatrix<f64>) -> (Vec<Option<f64>>, Option<f64>) {
    let k = info.nrows();
    if k == 0 {
        return (Vec::new(), None);
    }
    if info.iter().any(|v| !v.is_finite()) {
        return (vec![None; k], None);
    }
    let eig = SymmetricEigen::new(info.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(min > max * 1e-14) {
        return (vec![None; k], Some(min));
    }
    let se = (0..k)
        .map(|i| {
            let var: f64 = (0..k)
                .map(|m| eig.eigenvectors[(i, m)].powi(2) / eig.eigenvalues[m])
                .sum();
            (var.is_finite() && var >= 0.0).then(|| var.sqrt())
        })
        .collect();
    (se, Some(min))
}

/// Standard errors of a fitted model at its estimates.
pub fn standard_errors(fit: &FitResult, data: &Dataset) -> Result<InformationSummary> {
    let free: Vec<usize> = (0..fit.estimates.len()).filter(|&j| !fit.fixed[j]).collect();
    // surface dimension errors before differencing
    evaluate(&fit.layout, &fit.estimates, data, false)?;
    let at: Vec<f64> = free.iter().map(|&j| fit.estimates[j]).collect();
    let score = |x: &[f64]| -> Vec<f64> {
        let mut full = fit.estimates.clone();
        for (&j, &v) in free.iter().zip(x) {
            full[j] = v;
        }
        match evaluate(&fit.layout, &full, data, true) {
            Ok(e) => {
                let g = e.gradient.expect("gradient requested");
                free.iter().map(|&j| g[j]).collect()
            }
            Err(_) => vec![f64::NAN; free.len()],
        }
    };
    let info = observed_information(score, &at);
    let (se_free, min_eigenvalue) = standard_errors_from_information(&info);
    let mut standard_errors = vec![None; fit.estimates.len()];
    for (&j, se) in free.iter().zip(se_free) {
        standard_errors[j] = se;
    }
    Ok(InformationSummary {
        standard_errors,
        min_eigenvalue,
    })
}
