//! Zero-inflated generalized extreme value (ZI-GEV) regression for binary
//! outcomes with a cure fraction.
//!
//! An individual is susceptible with probability `logistic(z'theta)`; a
//! susceptible individual has the event with probability given by the GEV
//! response curve `pi(x'beta; tau)`. Immunes never have the event, and for a
//! zero response the susceptibility status is unobserved.
//!
//! - [`gev`]: GEV distribution function, response curve and inverse link.
//! - [`model`]: specification checks, data, joint probability, likelihood.
//! - [`inference`]: the estimator registry, MLE fitting, standard errors,
//!   Wald tests, AIC and prediction.
//! - [`optim`]: the minimizers used by the fitting driver.
//! - [`simulation`]: data generation and replicated Monte Carlo studies.

pub mod error;
pub mod gev;
pub mod inference;
pub mod model;
pub mod optim;
pub mod simulation;

pub use error::{Error, Result};
pub use gev::{gev_cdf, link_eta, logistic, response_prob, GevLink, GevParams, Probability, Skewness};
pub use inference::{
    aic, fit_mle, fit_model, fit_naive_gev, fit_naive_logistic, fit_with, predict_infection,
    standard_errors, wald_test, Estimator, EstimatorRegistry, FitConfig, FitResult, Prediction,
    WaldResult,
};
pub use model::{
    joint_prob, log_likelihood, score, validate_spec, Dataset, ModelSpec, ParamVector,
    ValidationReport,
};
pub use simulation::{bias_rmse, run_study, simulate_dataset, SimulationConfig, SimulationReport};
