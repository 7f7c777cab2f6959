//! The model family as interchangeable estimators, registered by name.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{logistic_f64, response_eval};
use crate::model::{Dataset, Family, ModelSpec, ParamLayout, ResponseLink};

use super::{fit_inner, FitConfig, Initialization};

/// Shape used for the start of every GEV fit.
pub const TAU_START: f64 = 0.1;
/// Frozen shape of the complementary log-log warm start.
pub const CLOGLOG_TAU: f64 = 1e-8;

/// Per-individual predicted probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub susceptible_prob: f64,
    pub infection_prob_if_susceptible: f64,
    pub marginal_infection_prob: f64,
}

/// One member of the model family: how its likelihood is built, where its
/// optimizer starts, and how it predicts.
pub trait Estimator: Send + Sync {
    /// Registry key, e.g. `m2`.
    fn name(&self) -> &'static str;

    /// Other accepted names.
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    /// Display label, e.g. `ZI-GEV`.
    fn label(&self) -> &'static str;

    fn family(&self) -> Family;

    fn layout(&self, spec: &ModelSpec) -> ParamLayout {
        ParamLayout::new(self.family(), spec.p(), spec.q())
    }

    /// Full-length starting vector in layout order.
    fn initial_point(&self, data: &Dataset, spec: &ModelSpec, config: &FitConfig)
        -> Result<Vec<f64>>;

    fn predict(&self, layout: &ParamLayout, params: &[f64], x_row: &[f64], z_row: &[f64])
        -> Result<Prediction> {
        predict_family(layout, params, x_row, z_row)
    }
}

pub(crate) fn predict_family(
    layout: &ParamLayout,
    params: &[f64],
    x_row: &[f64],
    z_row: &[f64],
) -> Result<Prediction> {
    if params.len() != layout.dim() {
        return Err(Error::Dimension {
            what: "parameter vector",
            expected: layout.dim(),
            got: params.len(),
        });
    }
    if x_row.len() != layout.p {
        return Err(Error::Dimension {
            what: "x row",
            expected: layout.p,
            got: x_row.len(),
        });
    }
    let eta: f64 = x_row.iter().zip(layout.beta(params)).map(|(a, b)| a * b).sum();
    let cond = match layout.family.link {
        ResponseLink::Gev => response_eval(eta, layout.tau(params).unwrap_or(0.0)).prob,
        ResponseLink::Logit => logistic_f64(eta),
    };
    let susceptible = if layout.family.cure {
        if z_row.len() != layout.q {
            return Err(Error::Dimension {
                what: "z row",
                expected: layout.q,
                got: z_row.len(),
            });
        }
        let a: f64 = z_row.iter().zip(layout.theta(params)).map(|(a, b)| a * b).sum();
        logistic_f64(a)
    } else {
        1.0
    };
    Ok(Prediction {
        susceptible_prob: susceptible,
        infection_prob_if_susceptible: cond,
        marginal_infection_prob: cond * susceptible,
    })
}

/// `beta` from a complementary log-log fit of the naive model, or zeros.
fn cloglog_beta(data: &Dataset, spec: &ModelSpec, config: &FitConfig) -> Vec<f64> {
    let mut sub = config.clone();
    sub.multistart = 1;
    sub.initialization = Initialization::Zero;
    sub.fixed = BTreeMap::from([("tau".to_string(), CLOGLOG_TAU)]);
    match fit_inner(&NaiveGev, data, spec, &sub, false) {
        Ok(fit) if fit.estimates.iter().all(|v| v.is_finite()) => fit.estimates[..spec.p()].to_vec(),
        _ => vec![0.0; spec.p()],
    }
}

/// Logistic regression ignoring immunity (M0).
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveLogistic;

impl Estimator for NaiveLogistic {
    fn name(&self) -> &'static str {
        "m0"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["logistic", "naive-logistic"]
    }
    fn label(&self) -> &'static str {
        "Logistic"
    }
    fn family(&self) -> Family {
        Family::LOGISTIC
    }
    fn initial_point(&self, _: &Dataset, spec: &ModelSpec, _: &FitConfig) -> Result<Vec<f64>> {
        Ok(vec![0.0; spec.p()])
    }
}

/// GEV regression ignoring immunity (M1).
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveGev;

impl Estimator for NaiveGev {
    fn name(&self) -> &'static str {
        "m1"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["gev", "naive-gev"]
    }
    fn label(&self) -> &'static str {
        "GEV"
    }
    fn family(&self) -> Family {
        Family::GEV
    }
    fn initial_point(&self, data: &Dataset, spec: &ModelSpec, config: &FitConfig) -> Result<Vec<f64>> {
        let mut start = match config.initialization {
            Initialization::Zero => vec![0.0; spec.p()],
            Initialization::CloglogWarmStart => cloglog_beta(data, spec, config),
        };
        start.push(TAU_START);
        Ok(start)
    }
}

/// Zero-inflated GEV regression (M2).
#[derive(Debug, Clone, Copy, Default)]
pub struct ZiGev;

impl Estimator for ZiGev {
    fn name(&self) -> &'static str {
        "m2"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["zi-gev", "zigev"]
    }
    fn label(&self) -> &'static str {
        "ZI-GEV"
    }
    fn family(&self) -> Family {
        Family::ZI_GEV
    }
    fn initial_point(&self, data: &Dataset, spec: &ModelSpec, config: &FitConfig) -> Result<Vec<f64>> {
        let mut start = match config.initialization {
            Initialization::Zero => vec![0.0; spec.p()],
            Initialization::CloglogWarmStart => cloglog_beta(data, spec, config),
        };
        start.extend(std::iter::repeat_n(0.0, spec.q()));
        start.push(TAU_START);
        Ok(start)
    }
}

/// Name → estimator lookup.
pub struct EstimatorRegistry {
    entries: Vec<Box<dyn Estimator>>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(NaiveLogistic));
        r.register(Box::new(NaiveGev));
        r.register(Box::new(ZiGev));
        r
    }

    /// Shared instance of [`EstimatorRegistry::builtin`].
    pub fn global() -> &'static EstimatorRegistry {
        static REGISTRY: OnceLock<EstimatorRegistry> = OnceLock::new();
        REGISTRY.get_or_init(EstimatorRegistry::builtin)
    }

    pub fn register(&mut self, e: Box<dyn Estimator>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    /// Looks up by registry name, alias, or label (case-insensitive).
    pub fn get(&self, name: &str) -> Result<&dyn Estimator> {
        let key = name.trim().to_ascii_lowercase();
        self.entries
            .iter()
            .find(|e| {
                e.name() == key
                    || e.label().eq_ignore_ascii_case(&key)
                    || e.aliases().iter().any(|a| *a == key)
            })
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "model",
                name: name.to_string(),
                known: self
                    .entries
                    .iter()
                    .map(|e| format!("{} ({})", e.name(), e.aliases().join("/")))
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}
