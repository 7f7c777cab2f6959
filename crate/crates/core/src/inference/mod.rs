//! Maximum-likelihood fitting of the model family, with standard errors,
//! Wald tests, AIC and prediction.

mod estimators;
mod information;
mod wald;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate, Dataset, ModelSpec, ParamLayout, ParamRole, ParamVector};
use crate::optim::{
    inf_norm, Bounds, MinimizeOptions, MinimizeOutcome, MinimizerRegistry, Objective, Status,
};

pub use estimators::{
    Estimator, EstimatorRegistry, NaiveGev, NaiveLogistic, Prediction, ZiGev, CLOGLOG_TAU,
    TAU_START,
};
pub use information::{
    observed_information, standard_errors, standard_errors_from_information, InformationSummary,
};
pub use wald::{aic, aic_value, wald_test, WaldResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// `theta = 0`, `tau = 0.1`, `beta` from a complementary log-log fit.
    #[default]
    CloglogWarmStart,
    /// Everything zero except `tau = 0.1`.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Registered minimizer name: `quasi-newton` or `simplex`.
    pub optimizer: String,
    pub max_iterations: usize,
    /// Tolerance on `||score||_inf / n`.
    pub tolerance: f64,
    pub multistart: usize,
    pub tau_bounds: (f64, f64),
    pub initialization: Initialization,
    /// Standard deviation of the multistart jitter.
    pub jitter_sd: f64,
    pub seed: u64,
    /// Parameters held at a value instead of estimated, keyed by name.
    pub fixed: BTreeMap<String, f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            optimizer: "quasi-newton".to_string(),
            max_iterations: 500,
            tolerance: 1e-6,
            multistart: 5,
            tau_bounds: (-5.0, 10.0),
            initialization: Initialization::CloglogWarmStart,
            jitter_sd: 0.5,
            seed: 0,
            fixed: BTreeMap::new(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        let (lo, hi) = self.tau_bounds;
        if !(lo <= 0.0 && 0.0 <= hi && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "tau bounds [{lo}, {hi}] must contain 0"
            )));
        }
        if self.multistart == 0 {
            return Err(Error::InvalidConfig("multistart must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd.is_finite()) {
            return Err(Error::InvalidConfig("jitter_sd must be nonnegative".into()));
        }
        MinimizerRegistry::builtin().get(&self.optimizer)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Registry name of the estimator.
    pub model: String,
    pub label: String,
    pub layout: ParamLayout,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// True where the parameter was held fixed.
    pub fixed: Vec<bool>,
    pub standard_errors: Vec<Option<f64>>,
    pub min_information_eigenvalue: Option<f64>,
    pub log_likelihood: f64,
    /// Number of estimated parameters.
    pub k: usize,
    pub aic: f64,
    pub n: usize,
    pub converged: bool,
    /// `||score||_inf / n` over the estimated parameters.
    pub gradient_norm: f64,
    pub boundary_rows: usize,
    pub clamped_rows: usize,
    pub iterations: usize,
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    pub notes: Vec<String>,
}

impl FitResult {
    /// Index of a coefficient, by full name (`beta:Weight`) or position
    /// (`beta2`, `theta1`, `tau`).
    pub fn coefficient_index(&self, name: &str) -> Option<usize> {
        if let Some(j) = self.names.iter().position(|n| n == name) {
            return Some(j);
        }
        let (role, rest) = if let Some(r) = name.strip_prefix("beta") {
            (ParamRole::Beta, r)
        } else if let Some(r) = name.strip_prefix("theta") {
            (ParamRole::Theta, r)
        } else {
            return None;
        };
        let pos: usize = rest.parse().ok()?;
        if pos == 0 {
            return None;
        }
        let j = match role {
            ParamRole::Beta if pos <= self.layout.p => pos - 1,
            ParamRole::Theta if pos <= self.layout.q => self.layout.p + pos - 1,
            _ => return None,
        };
        Some(j)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coefficient_index(name).map(|j| self.estimates[j])
    }

    pub fn beta(&self) -> &[f64] {
        self.layout.beta(&self.estimates)
    }

    pub fn theta(&self) -> &[f64] {
        self.layout.theta(&self.estimates)
    }

    pub fn tau(&self) -> Option<f64> {
        self.layout.tau(&self.estimates)
    }

    /// The ZI-GEV parameter vector, when the fit has a cure part and a shape.
    pub fn param_vector(&self) -> Option<ParamVector> {
        if self.layout.family.cure && self.layout.has_tau() {
            ParamVector::from_flat(self.layout.p, self.layout.q, &self.estimates).ok()
        } else {
            None
        }
    }
}

/// `-loglik / n` over the free coordinates.
struct NegLogLik<'a> {
    layout: ParamLayout,
    data: &'a Dataset,
    template: Vec<f64>,
    free: Vec<usize>,
}

impl NegLogLik<'_> {
    fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = self.template.clone();
        for (&j, &v) in self.free.iter().zip(free) {
            full[j] = v;
        }
        full
    }
}

impl Objective for NegLogLik<'_> {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let full = self.expand(x);
        let n = self.data.n() as f64;
        match evaluate(&self.layout, &full, self.data, true) {
            Ok(e) => {
                let g = e.gradient.expect("gradient requested");
                (
                    -e.log_likelihood / n,
                    self.free.iter().map(|&j| -g[j] / n).collect(),
                )
            }
            Err(_) => (f64::INFINITY, vec![0.0; self.free.len()]),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let full = self.expand(x);
        match evaluate(&self.layout, &full, self.data, false) {
            Ok(e) => -e.log_likelihood / self.data.n() as f64,
            Err(_) => f64::INFINITY,
        }
    }
}

fn resolve_fixed(
    names: &[String],
    layout: &ParamLayout,
    fixed: &BTreeMap<String, f64>,
) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; layout.dim()];
    for (key, &value) in fixed {
        let j = names
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| Error::UnknownName {
                kind: "parameter",
                name: key.clone(),
                known: names.join(", "),
            })?;
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!("fixed value for '{key}' is not finite")));
        }
        out[j] = Some(value);
    }
    Ok(out)
}

fn run_start(
    objective: &NegLogLik<'_>,
    x0: &[f64],
    bounds: &Bounds,
    config: &FitConfig,
    registry: &MinimizerRegistry,
) -> Result<MinimizeOutcome> {
    let options = MinimizeOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.tolerance,
    };
    let minimizer = registry.get(&config.optimizer)?;
    let mut out = minimizer.minimize(objective, x0, bounds, &options);
    if config.optimizer == "quasi-newton" && out.status == Status::LineSearchFailed {
        // polish with the simplex, then let the quasi-Newton finish from there
        let simplex = registry.get("simplex")?.minimize(objective, &out.x, bounds, &options);
        let again = minimizer.minimize(objective, &simplex.x, bounds, &options);
        let iterations = out.iterations + simplex.iterations + again.iterations;
        let evaluations = out.evaluations + simplex.evaluations + again.evaluations;
        if again.value <= out.value {
            out = again;
        }
        out.iterations = iterations;
        out.evaluations = evaluations;
    }
    Ok(out)
}

/// Fits `estimator` by maximum likelihood with multistarts.
pub fn fit_with(
    estimator: &dyn Estimator,
    data: &Dataset,
    spec: &ModelSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    fit_inner(estimator, data, spec, config, true)
}

pub(crate) fn fit_inner(
    estimator: &dyn Estimator,
    data: &Dataset,
    spec: &ModelSpec,
    config: &FitConfig,
    with_standard_errors: bool,
) -> Result<FitResult> {
    config.validate()?;
    let layout = estimator.layout(spec);
    if data.p() != spec.p() {
        return Err(Error::Dimension {
            what: "columns of X vs spec",
            expected: spec.p(),
            got: data.p(),
        });
    }
    if layout.family.cure && data.q() != spec.q() {
        return Err(Error::Dimension {
            what: "columns of Z vs spec",
            expected: spec.q(),
            got: data.q(),
        });
    }
    let ones = data.ones();
    if ones == 0 {
        return Err(Error::DegenerateResponse(0));
    }
    if ones == data.n() {
        return Err(Error::DegenerateResponse(1));
    }

    let names = layout.names(&spec.x_names(), &spec.z_names());
    let fixed = resolve_fixed(&names, &layout, &config.fixed)?;
    let free: Vec<usize> = (0..layout.dim()).filter(|&j| fixed[j].is_none()).collect();
    let k = free.len();
    if data.n() < k {
        return Err(Error::TooFewObservations { n: data.n(), k });
    }

    let mut template = estimator.initial_point(data, spec, config)?;
    for (t, f) in template.iter_mut().zip(&fixed) {
        if let Some(v) = f {
            *t = *v;
        }
    }
    let mut bounds = Bounds::unbounded(k);
    if let Some(t) = layout.tau_index() {
        if let Some(pos) = free.iter().position(|&j| j == t) {
            bounds = bounds.with(pos, config.tau_bounds.0, config.tau_bounds.1);
        }
    }

    let objective = NegLogLik {
        layout,
        data,
        template: template.clone(),
        free: free.clone(),
    };
    let x_init: Vec<f64> = free.iter().map(|&j| template[j]).collect();
    let starts: Vec<Vec<f64>> = (0..config.multistart)
        .map(|s| {
            let mut x = x_init.clone();
            if s > 0 && config.jitter_sd > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(s as u64);
                let normal = Normal::new(0.0, config.jitter_sd).expect("valid sd");
                for v in x.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
            bounds.clip(&mut x);
            x
        })
        .collect();

    let registry = MinimizerRegistry::builtin();
    let outcomes: Vec<MinimizeOutcome> = starts
        .par_iter()
        .map(|x0| run_start(&objective, x0, &bounds, config, &registry))
        .collect::<Result<_>>()?;

    let n = data.n() as f64;
    let summaries: Vec<StartSummary> = outcomes
        .iter()
        .map(|o| StartSummary {
            log_likelihood: -o.value * n,
            converged: inf_norm(&o.gradient) <= config.tolerance,
            iterations: o.iterations,
            status: o.status,
        })
        .collect();
    let best = (0..outcomes.len())
        .reduce(|a, b| if outcomes[b].value < outcomes[a].value { b } else { a })
        .expect("at least one start");

    let estimates = objective.expand(&outcomes[best].x);
    let eval = evaluate(&layout, &estimates, data, true)?;
    let grad = eval.gradient.as_ref().expect("gradient requested");
    let gradient_norm = free.iter().fold(0.0f64, |m, &j| m.max(grad[j].abs())) / n;

    let mut notes = Vec::new();
    let mut converged = gradient_norm <= config.tolerance;
    if perfect_fit(&layout, &estimates, data)? {
        converged = false;
        notes.push("complete separation: fitted probabilities reproduce every response".into());
    }
    if !eval.boundary_rows.is_empty() {
        notes.push(format!(
            "{} row(s) lie on the support boundary of the GEV link",
            eval.boundary_rows.len()
        ));
    }
    if layout.family.cure {
        let theta = layout.theta(&estimates);
        let min_a = data
            .z()
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(theta).map(|(u, v)| u * v).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if min_a > 10.0 {
            notes.push("every fitted susceptible probability exceeds 0.9999: no immune fraction detected".into());
        }
    }
    if let (Some(t), (lo, hi)) = (layout.tau_index(), config.tau_bounds) {
        if fixed[t].is_none() && (estimates[t] <= lo || estimates[t] >= hi) {
            notes.push(format!("tau stopped at its bound ({})", estimates[t]));
        }
    }

    let log_likelihood = eval.log_likelihood;
    let mut result = FitResult {
        model: estimator.name().to_string(),
        label: estimator.label().to_string(),
        layout,
        names,
        estimates,
        fixed: fixed.iter().map(Option::is_some).collect(),
        standard_errors: vec![None; layout.dim()],
        min_information_eigenvalue: None,
        log_likelihood,
        k,
        aic: aic_value(log_likelihood, k),
        n: data.n(),
        converged,
        gradient_norm,
        boundary_rows: eval.boundary_rows.len(),
        clamped_rows: eval.clamped_rows,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        best_start: best,
        starts: summaries,
        notes,
    };
    if with_standard_errors {
        let info = standard_errors(&result, data)?;
        if info.min_eigenvalue.is_some_and(|e| e <= 0.0) {
            result
                .notes
                .push("observed information is not positive definite".to_string());
        }
        result.standard_errors = info.standard_errors;
        result.min_information_eigenvalue = info.min_eigenvalue;
    }
    Ok(result)
}

fn perfect_fit(layout: &ParamLayout, params: &[f64], data: &Dataset) -> Result<bool> {
    let y = data.y();
    let x = data.x();
    let z = data.z();
    for i in 0..data.n() {
        let xr = x.row(i).to_vec();
        let zr = z.row(i).to_vec();
        let p = estimators::predict_family(layout, params, &xr, &zr)?;
        if (p.marginal_infection_prob - y[i]).abs() > 1e-6 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// ZI-GEV maximum-likelihood fit.
pub fn fit_mle(data: &Dataset, spec: &ModelSpec, config: &FitConfig) -> Result<FitResult> {
    fit_with(&ZiGev, data, spec, config)
}

/// GEV regression that treats every zero as a susceptible non-event.
pub fn fit_naive_gev(data: &Dataset, spec: &ModelSpec, config: &FitConfig) -> Result<FitResult> {
    fit_with(&NaiveGev, data, spec, config)
}

/// Logistic regression that treats every zero as a susceptible non-event.
pub fn fit_naive_logistic(
    data: &Dataset,
    spec: &ModelSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    fit_with(&NaiveLogistic, data, spec, config)
}

/// Fits the model registered under `name`.
pub fn fit_model(
    name: &str,
    data: &Dataset,
    spec: &ModelSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    fit_with(EstimatorRegistry::global().get(name)?, data, spec, config)
}

/// Susceptibility, conditional infection and marginal infection probabilities.
pub fn predict_infection(fit: &FitResult, x_row: &[f64], z_row: &[f64]) -> Result<Prediction> {
    let estimator = EstimatorRegistry::global().get(&fit.model)?;
    estimator.predict(&fit.layout, &fit.estimates, x_row, z_row)
}
