//! Zero-inflated data generation and replicated Monte Carlo studies.
//!
//! Each replicate `k` in `1..=N` draws its own dataset from a ChaCha stream
//! seeded with `base_seed + k`, so serial and parallel runs agree exactly.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gev::{logistic_f64, response_eval, DEFAULT_TAU_BOUND};
use crate::inference::{fit_inner, EstimatorRegistry, FitConfig};
use crate::model::{Dataset, ModelSpec, Susceptibility};

/// Default generating shape.
pub const DEFAULT_TAU_TRUE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelPreset {
    M1,
    M2,
}

impl ModelPreset {
    pub fn beta(self) -> Vec<f64> {
        match self {
            ModelPreset::M1 => vec![-2.1, 1.2, 0.0],
            ModelPreset::M2 => vec![-1.3, 0.0, 2.5],
        }
    }
}

impl FromStr for ModelPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(ModelPreset::M1),
            "m2" => Ok(ModelPreset::M2),
            _ => Err(Error::UnknownName {
                kind: "model preset",
                name: s.to_string(),
                known: "M1, M2".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioPreset {
    Scenario1,
    Scenario2,
}

impl ScenarioPreset {
    pub fn theta(self) -> Vec<f64> {
        match self {
            ScenarioPreset::Scenario1 => vec![0.85, -1.8, 0.5],
            ScenarioPreset::Scenario2 => vec![0.2, 1.5, -1.71],
        }
    }

    /// Nominal immune percentage of the scenario.
    pub fn immune_percent(self) -> u32 {
        match self {
            ScenarioPreset::Scenario1 => 30,
            ScenarioPreset::Scenario2 => 70,
        }
    }
}

impl FromStr for ScenarioPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scenario1" | "s1" => Ok(ScenarioPreset::Scenario1),
            "scenario2" | "s2" => Ok(ScenarioPreset::Scenario2),
            _ => Err(Error::UnknownName {
                kind: "scenario preset",
                name: s.to_string(),
                known: "Scenario1, Scenario2".into(),
            }),
        }
    }
}

/// Non-intercept covariates are independent unit-variance normals with these
/// means; Z is drawn independently of X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateDesign {
    pub x_means: Vec<f64>,
    pub z_means: Vec<f64>,
}

impl CovariateDesign {
    /// X2, X3 ~ N(0, 1); Z2 ~ N(0, 1), Z3 ~ N(1, 1). Under this design the
    /// two scenario presets give 30% and 70% immunes.
    pub fn paper() -> Self {
        Self {
            x_means: vec![0.0, 0.0],
            z_means: vec![0.0, 1.0],
        }
    }

    pub fn standard_normal(p: usize, q: usize) -> Self {
        Self {
            x_means: vec![0.0; p.saturating_sub(1)],
            z_means: vec![0.0; q.saturating_sub(1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub beta_true: Vec<f64>,
    pub theta_true: Vec<f64>,
    pub tau_true: f64,
    pub n: usize,
    pub replicates: usize,
    pub base_seed: u64,
    /// Registered estimator names or aliases.
    pub estimators: Vec<String>,
    pub design: CovariateDesign,
    pub fit: FitConfig,
}

impl SimulationConfig {
    pub fn preset(model: ModelPreset, scenario: ScenarioPreset, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            beta_true: model.beta(),
            theta_true: scenario.theta(),
            tau_true: DEFAULT_TAU_TRUE,
            n,
            replicates,
            base_seed: seed,
            estimators: vec!["zi-gev".to_string()],
            design: CovariateDesign::paper(),
            fit: FitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.replicates == 0 {
            return Err(Error::InvalidConfig("n and the replicate count must be at least 1".into()));
        }
        if self.beta_true.is_empty() || self.theta_true.is_empty() {
            return Err(Error::InvalidConfig("beta and theta must be nonempty".into()));
        }
        if self.design.x_means.len() + 1 != self.beta_true.len() {
            return Err(Error::Dimension {
                what: "X covariate design",
                expected: self.beta_true.len() - 1,
                got: self.design.x_means.len(),
            });
        }
        if self.design.z_means.len() + 1 != self.theta_true.len() {
            return Err(Error::Dimension {
                what: "Z covariate design",
                expected: self.theta_true.len() - 1,
                got: self.design.z_means.len(),
            });
        }
        let all = self
            .beta_true
            .iter()
            .chain(&self.theta_true)
            .chain(&self.design.x_means)
            .chain(&self.design.z_means);
        if all.clone().any(|v| !v.is_finite()) || !self.tau_true.is_finite() {
            return Err(Error::InvalidConfig("true parameters must be finite".into()));
        }
        if self.tau_true.abs() > DEFAULT_TAU_BOUND {
            return Err(Error::InvalidConfig(format!("tau_true {} out of range", self.tau_true)));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators requested".into()));
        }
        let registry = EstimatorRegistry::global();
        for e in &self.estimators {
            registry.get(e)?;
        }
        self.fit.validate()
    }

    /// Covariate names `x2..`, `z2..` with intercepts.
    pub fn spec(&self) -> ModelSpec {
        let x: Vec<String> = (2..=self.beta_true.len()).map(|j| format!("x{j}")).collect();
        let z: Vec<String> = (2..=self.theta_true.len()).map(|j| format!("z{j}")).collect();
        let x: Vec<&str> = x.iter().map(String::as_str).collect();
        let z: Vec<&str> = z.iter().map(String::as_str).collect();
        ModelSpec::continuous(&x, &z)
    }
}

/// Draws one dataset with ground-truth susceptibility attached.
///
/// Per row: X covariates, Z covariates, `S ~ Bernoulli(logistic(z'theta))`,
/// then `Y ~ Bernoulli(pi(x'beta))` if susceptible, else `Y = 0`.
pub fn simulate_dataset(config: &SimulationConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, p, q) = (config.n, config.beta_true.len(), config.theta_true.len());
    let mut x = Array2::<f64>::ones((n, p));
    let mut z = Array2::<f64>::ones((n, q));
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        for (j, m) in config.design.x_means.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            x[[i, j + 1]] = m + e;
        }
        for (j, m) in config.design.z_means.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            z[[i, j + 1]] = m + e;
        }
        let a: f64 = z.row(i).iter().zip(&config.theta_true).map(|(u, v)| u * v).sum();
        let eta: f64 = x.row(i).iter().zip(&config.beta_true).map(|(u, v)| u * v).sum();
        let susceptible = rng.random::<f64>() < logistic_f64(a);
        let u: f64 = rng.random();
        let event = susceptible && u < response_eval(eta, config.tau_true).prob;
        s.push(if susceptible {
            Susceptibility::Susceptible
        } else {
            Susceptibility::Immune
        });
        y.push(u8::from(event));
    }
    Dataset::new(y, x, z)?.with_susceptibility(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRmse {
    pub mean: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Sample standard deviation of the estimates (0 for a single estimate).
    pub sd: f64,
}

/// Per-coordinate mean, bias and RMSE of `estimates` around `truth`.
pub fn bias_rmse(estimates: &[Vec<f64>], truth: &[f64]) -> Result<Vec<BiasRmse>> {
    if estimates.is_empty() {
        return Err(Error::Simulation("no estimates to summarise".into()));
    }
    if let Some(bad) = estimates.iter().find(|e| e.len() != truth.len()) {
        return Err(Error::Dimension {
            what: "estimate vector",
            expected: truth.len(),
            got: bad.len(),
        });
    }
    let m = estimates.len() as f64;
    Ok(truth
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mean = estimates.iter().map(|e| e[j]).sum::<f64>() / m;
            let mse = estimates.iter().map(|e| (e[j] - t).powi(2)).sum::<f64>() / m;
            let var = if estimates.len() > 1 {
                estimates.iter().map(|e| (e[j] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            BiasRmse {
                mean,
                bias: mean - t,
                rmse: mse.sqrt(),
                sd: var.sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub rmse: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub label: String,
    pub successes: usize,
    pub failures: usize,
    /// `beta` coefficients only.
    pub coefficients: Vec<CoefficientSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub replicates: usize,
    pub mean_immune_fraction: f64,
    pub mean_ones_fraction: f64,
    pub first_seed: u64,
    pub last_seed: u64,
    pub estimators: Vec<EstimatorSummary>,
}

impl SimulationReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        let canonical = EstimatorRegistry::global().get(name).ok()?.name();
        self.estimators.iter().find(|e| e.estimator == canonical)
    }
}

struct ReplicateOutcome {
    immune_fraction: f64,
    ones_fraction: f64,
    betas: Vec<Option<Vec<f64>>>,
}

fn run_replicate(config: &SimulationConfig, spec: &ModelSpec, seed: u64) -> Result<ReplicateOutcome> {
    let data = simulate_dataset(config, seed)?;
    let immune_fraction = data.immune_fraction().unwrap_or(f64::NAN);
    let ones_fraction = data.ones_fraction();
    let view = data.estimation_view().without_susceptibility();
    let registry = EstimatorRegistry::global();
    let betas = config
        .estimators
        .iter()
        .map(|name| {
            let est = registry.get(name).expect("validated");
            match fit_inner(est, &view, spec, &config.fit, false) {
                Ok(fit) if fit.converged => Some(fit.beta().to_vec()),
                _ => None,
            }
        })
        .collect();
    Ok(ReplicateOutcome {
        immune_fraction,
        ones_fraction,
        betas,
    })
}

/// Runs `config.replicates` simulate-and-fit replicates and aggregates the
/// `beta` estimates per estimator. Non-converged fits are excluded and counted.
pub fn run_study(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let spec = config.spec();
    let outcomes: Vec<ReplicateOutcome> = (1..=config.replicates as u64)
        .into_par_iter()
        .map(|k| run_replicate(config, &spec, config.base_seed.wrapping_add(k)))
        .collect::<Result<_>>()?;

    let registry = EstimatorRegistry::global();
    let names: Vec<String> = spec.x_names().iter().map(|n| format!("beta:{n}")).collect();
    let mut estimators = Vec::new();
    for (e_idx, name) in config.estimators.iter().enumerate() {
        let est = registry.get(name)?;
        let ok: Vec<Vec<f64>> = outcomes
            .iter()
            .filter_map(|o| o.betas[e_idx].clone())
            .collect();
        if ok.is_empty() {
            return Err(Error::Simulation(format!(
                "all {} replicates failed for estimator {}",
                config.replicates,
                est.label()
            )));
        }
        let stats = bias_rmse(&ok, &config.beta_true)?;
        estimators.push(EstimatorSummary {
            estimator: est.name().to_string(),
            label: est.label().to_string(),
            successes: ok.len(),
            failures: config.replicates - ok.len(),
            coefficients: stats
                .iter()
                .zip(&names)
                .zip(&config.beta_true)
                .map(|((s, n), &t)| CoefficientSummary {
                    name: n.clone(),
                    truth: t,
                    mean: s.mean,
                    bias: s.bias,
                    rmse: s.rmse,
                    sd: s.sd,
                })
                .collect(),
        });
    }

    let m = outcomes.len() as f64;
    Ok(SimulationReport {
        config: config.clone(),
        replicates: config.replicates,
        mean_immune_fraction: outcomes.iter().map(|o| o.immune_fraction).sum::<f64>() / m,
        mean_ones_fraction: outcomes.iter().map(|o| o.ones_fraction).sum::<f64>() / m,
        first_seed: config.base_seed.wrapping_add(1),
        last_seed: config.base_seed.wrapping_add(config.replicates as u64),
        estimators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_immune_fractions() {
        for (scenario, target) in [(ScenarioPreset::Scenario1, 0.30), (ScenarioPreset::Scenario2, 0.70)] {
            let cfg = SimulationConfig::preset(ModelPreset::M1, scenario, 100_000, 1, 0);
            let data = simulate_dataset(&cfg, 11).unwrap();
            let frac = data.immune_fraction().unwrap();
            assert!((frac - target).abs() < 0.01, "{scenario:?}: {frac}");
        }
    }

    #[test]
    fn everyone_immune() {
        let mut cfg = SimulationConfig::preset(ModelPreset::M2, ScenarioPreset::Scenario1, 500, 1, 0);
        cfg.theta_true = vec![-30.0, 0.0, 0.0];
        let data = simulate_dataset(&cfg, 3).unwrap();
        assert_eq!(data.ones(), 0);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario2, 300, 1, 0);
        assert_eq!(simulate_dataset(&cfg, 5).unwrap(), simulate_dataset(&cfg, 5).unwrap());
        assert_ne!(simulate_dataset(&cfg, 5).unwrap(), simulate_dataset(&cfg, 6).unwrap());
    }

    #[test]
    fn events_only_among_susceptibles() {
        let cfg = SimulationConfig::preset(ModelPreset::M2, ScenarioPreset::Scenario2, 2000, 1, 0);
        let data = simulate_dataset(&cfg, 9).unwrap();
        let s = data.susceptibility().unwrap();
        for (i, &y) in data.y().iter().enumerate() {
            if y == 1.0 {
                assert_eq!(s[i], Susceptibility::Susceptible);
            }
        }
    }

    #[test]
    fn bias_rmse_examples() {
        let r = bias_rmse(&[vec![1.0], vec![3.0]], &[2.0]).unwrap();
        assert_eq!(r[0].bias, 0.0);
        assert_eq!(r[0].rmse, 1.0);
        let r = bias_rmse(&[vec![2.5]], &[2.5]).unwrap();
        assert_eq!((r[0].bias, r[0].rmse), (0.0, 0.0));
        assert!(bias_rmse(&[], &[1.0]).is_err());
        assert!(bias_rmse(&[vec![1.0, 2.0]], &[1.0]).is_err());
    }

    #[test]
    fn bias_rmse_against_direct_formula() {
        let est = vec![
            vec![0.9, -2.0],
            vec![1.4, -2.6],
            vec![1.1, -1.7],
            vec![0.7, -2.2],
            vec![1.2, -2.1],
        ];
        let truth = [1.0, -2.0];
        // direct: mean - truth; sqrt(mean of squared errors)
        let expected_bias = [(0.9 + 1.4 + 1.1 + 0.7 + 1.2) / 5.0 - 1.0, (-2.0 - 2.6 - 1.7 - 2.2 - 2.1) / 5.0 + 2.0];
        let expected_rmse = [
            ((0.01 + 0.16 + 0.01 + 0.09 + 0.04) / 5.0f64).sqrt(),
            ((0.0 + 0.36 + 0.09 + 0.04 + 0.01) / 5.0f64).sqrt(),
        ];
        let r = bias_rmse(&est, &truth).unwrap();
        for j in 0..2 {
            assert!((r[j].bias - expected_bias[j]).abs() < 1e-12);
            assert!((r[j].rmse - expected_rmse[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario1, 10, 1, 0);
        assert!(cfg.validate().is_ok());
        cfg.estimators = vec!["probit".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario1, 10, 1, 0);
        cfg.design.z_means.pop();
        assert!(cfg.validate().is_err());
        cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario1, 0, 1, 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn presets_parse() {
        assert_eq!("m1".parse::<ModelPreset>().unwrap(), ModelPreset::M1);
        assert_eq!("Scenario2".parse::<ScenarioPreset>().unwrap(), ScenarioPreset::Scenario2);
        assert!("M3".parse::<ModelPreset>().is_err());
    }
}
