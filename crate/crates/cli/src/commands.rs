use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use zigev_core::inference::{fit_model, predict_infection};
use zigev_core::simulation::run_study;

use crate::config::{RunConfig, StudyConfig};
use crate::error::{exit, CliError, CliResult};
use crate::io::{load_dataset, read_table};
use crate::report::{render_fit, render_study, response_curves_csv, FitReport, StudyCell, StudyReport, SCHEMA_VERSION};

pub const FIT_JSON: &str = "fit_report.json";
pub const FIT_TEXT: &str = "fit_report.txt";
pub const CURVES_CSV: &str = "response_curves.csv";
pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const STUDY_JSON: &str = "simulation_report.json";
pub const STUDY_TEXT: &str = "simulation_report.txt";

pub const DEFAULT_OUT: &str = "zigev-out";

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Fits every configured model and writes the report files into `out`.
/// Returns exit code 2 when any model failed to converge.
pub fn cmd_fit(config: RunConfig, out: &Path, color: bool) -> CliResult<i32> {
    for m in &config.models {
        zigev_core::inference::EstimatorRegistry::global().get(m)?;
    }
    config.fit.validate()?;
    let loaded = load_dataset(
        &config.input,
        &config.response,
        &config.x_columns,
        &config.z_columns,
        &config.categorical,
    )?;
    if let Some(warning) = loaded.check(config.strict)? {
        eprintln!("{warning}");
    }
    let fits = config
        .models
        .iter()
        .map(|m| fit_model(m, &loaded.dataset, &loaded.spec, &config.fit))
        .collect::<Result<Vec<_>, _>>()?;
    let report = FitReport::new(
        config,
        loaded.design,
        loaded.report,
        loaded.dataset.n(),
        loaded.dataset.ones(),
        fits,
    );
    write_file(&out.join(FIT_JSON), &to_json(&report))?;
    write_file(&out.join(FIT_TEXT), &render_fit(&report, false))?;
    write_file(&out.join(CURVES_CSV), &response_curves_csv(&report))?;
    print!("{}", render_fit(&report, color));
    if report.all_converged {
        Ok(exit::SUCCESS)
    } else {
        eprintln!("warning: at least one model did not converge");
        Ok(exit::NOT_CONVERGED)
    }
}

pub fn load_fit_report(path: &Path) -> CliResult<FitReport> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))?;
    let version = value.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(u64::from(SCHEMA_VERSION)) {
        return Err(CliError::parse(
            path,
            format!("unsupported schema_version {version:?} (expected {SCHEMA_VERSION})"),
        ));
    }
    serde_json::from_value(value).map_err(|e| CliError::parse(path, e.to_string()))
}

/// Predictions for each row of `data` under each selected model of a saved
/// fit, as CSV text.
pub fn predict_csv(report: &FitReport, data: &Path, models: &[String]) -> CliResult<String> {
    let fits: Vec<_> = if models.is_empty() {
        report.models.iter().map(|m| &m.fit).collect()
    } else {
        models
            .iter()
            .map(|name| {
                report
                    .model(name)
                    .ok_or_else(|| CliError::Usage(format!("model '{name}' is not in the fit report")))
            })
            .collect::<CliResult<_>>()?
    };
    let table = read_table(data)?;
    let (x, z) = report.design.matrices(&table, data)?;
    let mut out = String::from("row,model,susceptible_prob,infection_prob_if_susceptible,marginal_infection_prob\n");
    for i in 0..table.rows.len() {
        let (xr, zr) = (x.row(i).to_vec(), z.row(i).to_vec());
        for fit in &fits {
            let p = predict_infection(fit, &xr, &zr)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                fit.model,
                p.susceptible_prob,
                p.infection_prob_if_susceptible,
                p.marginal_infection_prob
            );
        }
    }
    Ok(out)
}

pub fn cmd_predict(fit_path: &Path, data: &Path, models: &[String], out: &Path) -> CliResult<i32> {
    let report = load_fit_report(fit_path)?;
    let csv = predict_csv(&report, data, models)?;
    write_file(&out.join(PREDICTIONS_CSV), &csv)?;
    print!("{csv}");
    Ok(exit::SUCCESS)
}

pub fn run_simulation(config: &StudyConfig) -> CliResult<StudyReport> {
    config.validate()?;
    let cells = config
        .cells()
        .into_iter()
        .map(|(scenario, sim)| {
            Ok(StudyCell {
                immune_percent: scenario.immune_percent(),
                n: sim.n,
                report: run_study(&sim)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        config: config.clone(),
        cells,
    })
}

pub fn cmd_simulate(config: StudyConfig, out: &Path) -> CliResult<i32> {
    let report = run_simulation(&config)?;
    let text = render_study(&report);
    write_file(&out.join(STUDY_JSON), &to_json(&report))?;
    write_file(&out.join(STUDY_TEXT), &text)?;
    print!("{text}");
    Ok(exit::SUCCESS)
}

/// Prints the identifiability report. A failed check is an error only in
/// strict mode.
pub fn cmd_validate(config: &RunConfig, strict: bool) -> CliResult<i32> {
    let loaded = load_dataset(
        &config.input,
        &config.response,
        &config.x_columns,
        &config.z_columns,
        &config.categorical,
    )?;
    println!("{}", loaded.report);
    for problem in &loaded.report.problems {
        println!("  - {problem}");
    }
    loaded.check(strict)?;
    Ok(exit::SUCCESS)
}

pub fn output_dir(flag: Option<PathBuf>, configured: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| configured.cloned())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}
