use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use zigev_core::gev::{link_eta, Probability};
use zigev_core::inference::{
    aic_value, fit_mle, fit_naive_gev, fit_naive_logistic, observed_information, wald_test,
    Estimator, FitConfig, FitResult, ZiGev,
};
use zigev_core::model::{log_likelihood, score, Dataset, ModelSpec, ParamVector};
use zigev_core::simulation::{
    simulate_dataset, CovariateDesign, ModelPreset, ScenarioPreset, SimulationConfig,
};
use zigev_core::GevLink;

/// Properties every returned fit must have.
fn check_fit(fit: &FitResult) {
    assert_eq!(fit.aic, aic_value(fit.log_likelihood, fit.k));
    assert_eq!(fit.aic, 2.0 * fit.k as f64 - 2.0 * fit.log_likelihood);
    for se in fit.standard_errors.iter().flatten() {
        assert!(*se >= 0.0);
    }
    if fit.converged {
        assert!(fit.gradient_norm <= 1e-6, "{}", fit.gradient_norm);
    }
}

fn m1_data(scenario: ScenarioPreset, n: usize, seed: u64) -> (Dataset, ModelSpec) {
    let cfg = SimulationConfig::preset(ModelPreset::M1, scenario, n, 1, 0);
    let data = simulate_dataset(&cfg, seed).unwrap().estimation_view().without_susceptibility();
    (data, cfg.spec())
}

fn intercept_only(y: Vec<u8>) -> Dataset {
    let n = y.len();
    Dataset::new(y, Array2::ones((n, 1)), Array2::ones((n, 1))).unwrap()
}

#[test]
fn fixed_nuisance_fit_matches_grid_search() {
    let mut cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario1, 400, 1, 0);
    cfg.beta_true = vec![-0.5];
    cfg.theta_true = vec![0.4];
    cfg.tau_true = 0.3;
    cfg.design = CovariateDesign::standard_normal(1, 1);
    let data = simulate_dataset(&cfg, 5).unwrap().without_susceptibility();
    let spec = ModelSpec::continuous(&[], &[]);

    let mut fc = FitConfig::default();
    fc.fixed.insert("theta:(Intercept)".into(), 0.4);
    fc.fixed.insert("tau".into(), 0.3);
    let fit = fit_mle(&data, &spec, &fc).unwrap();
    check_fit(&fit);
    assert_eq!(fit.k, 1);

    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for i in 0..=20_000 {
        let b = -10.0 + 1e-3 * i as f64;
        let ll = log_likelihood(&ParamVector::new(vec![b], vec![0.4], 0.3).unwrap(), &data).unwrap();
        if ll > best {
            (best, arg) = (ll, b);
        }
    }
    assert!((fit.beta()[0] - arg).abs() < 2e-3, "{} vs grid {arg}", fit.beta()[0]);
}

#[test]
fn logistic_recovers_generating_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 10_000;
    let mut x = Array2::<f64>::ones((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let v: f64 = rng.sample(StandardNormal);
        x[[i, 1]] = v;
        let p = 1.0 / (1.0 + (-(-1.0 + 2.0 * v)).exp());
        y.push(u8::from(rng.random::<f64>() < p));
    }
    let data = Dataset::new(y, x, Array2::ones((n, 1))).unwrap();
    let fit = fit_naive_logistic(&data, &ModelSpec::continuous(&["v"], &[]), &FitConfig::default()).unwrap();
    check_fit(&fit);
    assert!(fit.converged);
    for (j, truth) in [-1.0, 2.0].iter().enumerate() {
        let se = fit.standard_errors[j].unwrap();
        assert!((fit.estimates[j] - truth).abs() < 3.0 * se, "beta{}: {}", j + 1, fit.estimates[j]);
    }
}

#[test]
fn balanced_coin_gives_zero_intercept() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y: Vec<u8> = (0..500).map(|_| u8::from(rng.random::<bool>())).collect();
    let fit = fit_naive_logistic(&intercept_only(y), &ModelSpec::continuous(&[], &[]), &FitConfig::default())
        .unwrap();
    check_fit(&fit);
    assert!(fit.estimates[0].abs() < 3.0 * fit.standard_errors[0].unwrap());
}

#[test]
fn intercept_only_gev_hits_the_sample_proportion() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y: Vec<u8> = (0..300).map(|_| u8::from(rng.random::<f64>() < 0.3)).collect();
    let ybar = y.iter().map(|&v| f64::from(v)).sum::<f64>() / 300.0;
    let data = intercept_only(y);
    let fit = fit_naive_gev(&data, &ModelSpec::continuous(&[], &[]), &FitConfig::default()).unwrap();
    check_fit(&fit);
    let tau = fit.tau().unwrap();
    let closed = link_eta(Probability::new(ybar).unwrap(), &GevLink::new(tau).unwrap()).unwrap();
    assert!((fit.beta()[0] - closed).abs() < 1e-4, "{} vs {closed}", fit.beta()[0]);

    // profile grid over (beta1, tau): nothing beats the fit
    let ll_of = |b: f64, t: f64| {
        let eta_ll = |yv: f64, p: f64| yv * p.ln() + (1.0 - yv) * (1.0 - p).ln();
        let p = zigev_core::response_prob(b, &GevLink::new(t).unwrap()).unwrap().value();
        300.0 * eta_ll(ybar, p)
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..=200 {
        for t in [-1.0, -0.3, 0.0, 0.5, 2.0] {
            best = best.max(ll_of(-3.0 + 0.02 * i as f64, t));
        }
    }
    assert!(fit.log_likelihood >= best - 1e-9);
    let saturated = 300.0 * (ybar * ybar.ln() + (1.0 - ybar) * (1.0 - ybar).ln());
    assert!((fit.log_likelihood - saturated).abs() < 1e-6);
}

#[test]
fn naive_and_zero_inflated_agree_without_immunes() {
    let mut cfg = SimulationConfig::preset(ModelPreset::M1, ScenarioPreset::Scenario1, 3000, 1, 0);
    cfg.theta_true = vec![30.0, 0.0, 0.0];
    let data = simulate_dataset(&cfg, 12).unwrap().estimation_view().without_susceptibility();
    let spec = ModelSpec::continuous(&["x2", "x3"], &[]);
    let z1 = Dataset::new(
        data.y().iter().map(|&v| v as u8).collect(),
        data.x().clone(),
        Array2::ones((data.n(), 1)),
    )
    .unwrap();
    let naive = fit_naive_gev(&z1, &spec, &FitConfig::default()).unwrap();
    let zi = fit_mle(&z1, &spec, &FitConfig::default()).unwrap();
    check_fit(&naive);
    check_fit(&zi);
    // the naive model is nested and efficient, so the spread of the
    // difference is bounded by the zero-inflated SE
    for j in 0..3 {
        let se = zi.standard_errors[j].unwrap();
        assert!((naive.beta()[j] - zi.beta()[j]).abs() < 3.0 * se, "beta{}", j + 1);
    }
    assert!(zi.log_likelihood >= naive.log_likelihood - 1e-6);
}

#[test]
fn standard_errors_shrink_like_root_n() {
    let mean_se = |n: usize| {
        let mut total = 0.0;
        for seed in 0..4 {
            let (data, spec) = m1_data(ScenarioPreset::Scenario1, n, 100 + seed);
            let fit = fit_mle(&data, &spec, &FitConfig::default()).unwrap();
            check_fit(&fit);
            total += fit.standard_errors[1].expect("beta2 SE");
        }
        total / 4.0
    };
    let ratio = mean_se(4000) / mean_se(1000);
    assert!((0.4..=0.6).contains(&ratio), "{ratio}");
}

#[test]
fn score_differenced_hessian_matches_second_differences() {
    let (data, _) = m1_data(ScenarioPreset::Scenario1, 1500, 31);
    let at = [-2.1, 1.2, 0.0, 0.85, -1.8, 0.5, 0.25];
    score(&ParamVector::from_flat(3, 3, &at).unwrap(), &data).expect("interior point");
    let ll = |v: &[f64]| log_likelihood(&ParamVector::from_flat(3, 3, v).unwrap(), &data).unwrap();
    let info = observed_information(
        |v| score(&ParamVector::from_flat(3, 3, v).unwrap(), &data).unwrap(),
        &at,
    );
    let k = at.len();
    for i in 0..k {
        for j in 0..k {
            let (hi, hj) = (1e-4 * at[i].abs().max(1.0), 1e-4 * at[j].abs().max(1.0));
            let mut v = at.to_vec();
            let mut f = |di: f64, dj: f64| {
                v.copy_from_slice(&at);
                v[i] += di;
                v[j] += dj;
                ll(&v)
            };
            let second = (f(hi, hj) - f(hi, -hj) - f(-hi, hj) + f(-hi, -hj)) / (4.0 * hi * hj);
            let scale = info[(i, i)].abs().max(info[(j, j)].abs());
            assert!(
                (-second - info[(i, j)]).abs() <= 1e-3 * scale,
                "({i},{j}): {} vs {}",
                -second,
                info[(i, j)]
            );
        }
    }
}

#[test]
fn first_order_condition_and_no_lost_ground() {
    let (data, spec) = m1_data(ScenarioPreset::Scenario1, 2000, 41);
    let config = FitConfig::default();
    let fit = fit_mle(&data, &spec, &config).unwrap();
    check_fit(&fit);
    assert!(fit.converged);
    let start = ZiGev.initial_point(&data, &spec, &config).unwrap();
    let start_ll = log_likelihood(&ParamVector::from_flat(3, 3, &start).unwrap(), &data).unwrap();
    assert!(fit.log_likelihood >= start_ll);
    if fit.boundary_rows == 0 {
        let g = score(&fit.param_vector().unwrap(), &data).unwrap();
        let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs())) / data.n() as f64;
        assert!(norm < 1e-4, "{norm}");
    }
}

fn swap_x_columns(data: &Dataset, a: usize, b: usize) -> Dataset {
    let mut x = data.x().clone();
    for i in 0..data.n() {
        x.swap([i, a], [i, b]);
    }
    Dataset::new(data.y().iter().map(|&v| v as u8).collect(), x, data.z().clone()).unwrap()
}

#[test]
fn relabeling_covariates_permutes_estimates() {
    let (data, spec) = m1_data(ScenarioPreset::Scenario1, 1500, 51);
    let fit = fit_mle(&data, &spec, &FitConfig::default()).unwrap();
    let swapped = swap_x_columns(&data, 1, 2);
    let spec_swapped = ModelSpec::continuous(&["x3", "x2"], &["z2", "z3"]);
    let fit_swapped = fit_mle(&swapped, &spec_swapped, &FitConfig::default()).unwrap();
    check_fit(&fit_swapped);
    assert!((fit.log_likelihood - fit_swapped.log_likelihood).abs() < 1e-8);
    assert!((fit.aic - fit_swapped.aic).abs() < 1e-8);
    assert!((fit.beta()[1] - fit_swapped.beta()[2]).abs() < 1e-4);
    assert!((fit.beta()[2] - fit_swapped.beta()[1]).abs() < 1e-4);
    assert_eq!(fit_swapped.estimate("beta:x2"), Some(fit_swapped.beta()[2]));
}

#[test]
fn wald_p_values_survive_sign_flips() {
    let (data, spec) = m1_data(ScenarioPreset::Scenario1, 1500, 61);
    let fit = fit_mle(&data, &spec, &FitConfig::default()).unwrap();
    let mut x = data.x().clone();
    x.column_mut(1).mapv_inplace(|v| -v);
    let flipped = Dataset::new(data.y().iter().map(|&v| v as u8).collect(), x, data.z().clone()).unwrap();
    let fit_flipped = fit_mle(&flipped, &spec, &FitConfig::default()).unwrap();
    let (a, b) = (wald_test(&fit, "beta2").unwrap(), wald_test(&fit_flipped, "beta2").unwrap());
    assert!((a.estimate + b.estimate).abs() < 1e-4);
    assert!((a.z.abs() - b.z.abs()).abs() < 1e-3 * a.z.abs().max(1.0));
    assert!((a.p_value - b.p_value).abs() < 1e-4);
}

#[test]
fn fits_are_bit_identical_across_runs_and_thread_counts() {
    let (data, spec) = m1_data(ScenarioPreset::Scenario2, 1000, 71);
    let config = FitConfig {
        seed: 99,
        ..FitConfig::default()
    };
    let a = fit_mle(&data, &spec, &config).unwrap();
    let b = fit_mle(&data, &spec, &config).unwrap();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| fit_mle(&data, &spec, &config).unwrap());
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| fit_mle(&data, &spec, &config).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, serial);
    assert_eq!(a, wide);
}

#[test]
fn naive_fits_underestimate_slope_under_heavy_immunity() {
    let (mut gev, mut logit) = (0.0, 0.0);
    let reps = 20;
    for seed in 0..reps {
        let (data, _) = m1_data(ScenarioPreset::Scenario2, 1500, 500 + seed);
        let spec = ModelSpec::continuous(&["x2", "x3"], &[]);
        let z1 = Dataset::new(
            data.y().iter().map(|&v| v as u8).collect(),
            data.x().clone(),
            Array2::ones((data.n(), 1)),
        )
        .unwrap();
        gev += fit_naive_gev(&z1, &spec, &FitConfig::default()).unwrap().beta()[1];
        logit += fit_naive_logistic(&z1, &spec, &FitConfig::default()).unwrap().beta()[1];
    }
    let (gev_bias, logit_bias) = (gev / reps as f64 - 1.2, logit / reps as f64 - 1.2);
    assert!(gev_bias < 0.0, "{gev_bias}");
    assert!(logit_bias < 0.0, "{logit_bias}");
}
