//! Synthetic datasets for demonstrations and tests.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use zigev_core::gev::{logistic, response_prob, GevLink};
use zigev_core::model::Susceptibility;
use zigev_core::simulation::{simulate_dataset, ModelPreset, ScenarioPreset, SimulationConfig};

use crate::error::CliResult;

/// Generating parameters of the synthetic dengue-like data.
pub const DENGUE_BETA: [f64; 2] = [2.86, -0.06];
pub const DENGUE_THETA: f64 = -0.3667;
pub const DENGUE_TAU: f64 = 0.5;

/// SYNTHETIC stand-in for a dengue serology survey: columns `y,Age,Weight`.
/// Age (years) is uniform on [5, 75]; Weight (kg) rises with age and is
/// clipped to [10, 130]. Infection depends on Weight only, susceptibility on
/// nothing, which gives about 18% ones.
pub fn synthetic_dengue(n: usize, seed: u64) -> CliResult<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let age_dist = Uniform::new(5.0, 75.0).expect("valid range");
    let noise = Normal::new(0.0, 10.0).expect("valid sd");
    let link = GevLink::new(DENGUE_TAU)?;
    let susceptible_p = logistic(DENGUE_THETA).value();
    let mut out = String::from("y,Age,Weight\n");
    for _ in 0..n {
        let age: f64 = age_dist.sample(&mut rng);
        let weight = (45.0 + 0.4 * age + noise.sample(&mut rng)).clamp(10.0, 130.0);
        let (age, weight) = ((age * 10.0).round() / 10.0, (weight * 10.0).round() / 10.0);
        let eta = DENGUE_BETA[0] + DENGUE_BETA[1] * weight;
        let susceptible = rng.random::<f64>() < susceptible_p;
        let infected = susceptible && rng.random::<f64>() < response_prob(eta, &link)?.value();
        let _ = writeln!(out, "{},{age},{weight}", u8::from(infected));
    }
    Ok(out)
}

/// One dataset from a simulation preset: `y,x2,..,z2,..,susceptible`, where
/// `susceptible` is the latent truth and is not used by the estimators.
pub fn preset_dataset(model: ModelPreset, scenario: ScenarioPreset, n: usize, tau: f64, seed: u64) -> CliResult<String> {
    let mut cfg = SimulationConfig::preset(model, scenario, n, 1, seed);
    cfg.tau_true = tau;
    let data = simulate_dataset(&cfg, seed)?;
    let (x, z) = (data.x(), data.z());
    let mut out = String::from("y");
    for j in 1..x.ncols() {
        let _ = write!(out, ",x{}", j + 1);
    }
    for j in 1..z.ncols() {
        let _ = write!(out, ",z{}", j + 1);
    }
    out.push_str(",susceptible\n");
    let s = data.susceptibility().expect("simulated data carries truth");
    for i in 0..data.n() {
        let _ = write!(out, "{}", data.y()[i]);
        for j in 1..x.ncols() {
            let _ = write!(out, ",{}", x[[i, j]]);
        }
        for j in 1..z.ncols() {
            let _ = write!(out, ",{}", z[[i, j]]);
        }
        let _ = writeln!(out, ",{}", u8::from(s[i] == Susceptibility::Susceptible));
    }
    Ok(out)
}
