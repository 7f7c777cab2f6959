//! Report objects and their renderings. Human tables and JSON files are both
//! produced from the same report value.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use zigev_core::gev::{logistic, response_prob, GevLink};
use zigev_core::inference::{wald_test, FitResult, WaldResult};
use zigev_core::model::{ParamRole, ResponseLink, ValidationReport};
use zigev_core::simulation::SimulationReport;

use crate::config::{RunConfig, StudyConfig};
use crate::io::Design;

pub const SCHEMA_VERSION: u32 = 1;

const DASH: &str = "—";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub fit: FitResult,
    /// Wald test per parameter, `None` where no standard error exists.
    pub tests: Vec<Option<WaldResult>>,
}

impl ModelEntry {
    pub fn new(fit: FitResult) -> Self {
        let tests = fit.names.iter().map(|n| wald_test(&fit, n).ok()).collect();
        Self { fit, tests }
    }

    fn heading(&self) -> String {
        format!("{} ({})", self.fit.model.to_uppercase(), self.fit.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config: RunConfig,
    pub design: Design,
    pub validation: ValidationReport,
    pub n: usize,
    pub ones: usize,
    pub models: Vec<ModelEntry>,
    /// Registry name of the model with the lowest AIC.
    pub lowest_aic: Option<String>,
    pub all_converged: bool,
}

impl FitReport {
    pub fn new(
        config: RunConfig,
        design: Design,
        validation: ValidationReport,
        n: usize,
        ones: usize,
        fits: Vec<FitResult>,
    ) -> Self {
        let lowest_aic = fits
            .iter()
            .filter(|f| f.aic.is_finite())
            .min_by(|a, b| a.aic.total_cmp(&b.aic))
            .map(|f| f.model.clone());
        let all_converged = fits.iter().all(|f| f.converged);
        Self {
            schema_version: SCHEMA_VERSION,
            seed: config.fit.seed,
            config,
            design,
            validation,
            n,
            ones,
            models: fits.into_iter().map(ModelEntry::new).collect(),
            lowest_aic,
            all_converged,
        }
    }

    pub fn model(&self, name: &str) -> Option<&FitResult> {
        self.models
            .iter()
            .map(|m| &m.fit)
            .find(|f| f.model.eq_ignore_ascii_case(name) || f.label.eq_ignore_ascii_case(name))
    }
}

fn role_rank(layout_role: ParamRole) -> u8 {
    match layout_role {
        ParamRole::Beta => 0,
        ParamRole::Theta => 1,
        ParamRole::Tau => 2,
    }
}

fn trim_lines(text: String) -> String {
    text.lines().map(|l| format!("{}\n", l.trim_end())).collect()
}

fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".into()
    } else {
        format!("{p:.4}")
    }
}

/// Model-comparison table (estimate and SE per model side by side), then a
/// coefficient table with Wald tests for each model.
pub fn render_fit(report: &FitReport, color: bool) -> String {
    let mut rows: Vec<(u8, String)> = Vec::new();
    for m in &report.models {
        for (j, name) in m.fit.names.iter().enumerate() {
            if !rows.iter().any(|(_, n)| n == name) {
                rows.push((role_rank(m.fit.layout.role(j)), name.clone()));
            }
        }
    }
    rows.sort_by_key(|(r, _)| *r);
    let label_w = rows
        .iter()
        .map(|(_, n)| n.chars().count())
        .chain(["log-likelihood".len()])
        .max()
        .unwrap_or(0)
        + 2;
    const CELL: usize = 11;
    let block = 2 * CELL + 2;

    let mut out = String::new();
    let pct = if report.n > 0 { 100.0 * report.ones as f64 / report.n as f64 } else { 0.0 };
    let _ = writeln!(out, "Data: n = {}, ones = {} ({pct:.1}%)", report.n, report.ones);
    let _ = writeln!(out, "Specification: {}", report.validation);
    let _ = writeln!(out);

    let _ = write!(out, "{:<label_w$}", "Parameter");
    for m in &report.models {
        let _ = write!(out, "{:<block$}", m.heading());
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<label_w$}", "");
    for _ in &report.models {
        let _ = write!(out, "{:>CELL$}{:>CELL$}  ", "Estimate", "SE");
    }
    let _ = writeln!(out);
    let rule = "-".repeat(label_w + block * report.models.len());
    let _ = writeln!(out, "{rule}");

    for (_, name) in &rows {
        let _ = write!(out, "{name:<label_w$}");
        for m in &report.models {
            match m.fit.names.iter().position(|n| n == name) {
                Some(j) => {
                    let se = m.fit.standard_errors[j].map_or(DASH.to_string(), |s| format!("{s:.4}"));
                    let est = format!("{:.4}", m.fit.estimates[j]);
                    let est = if m.fit.fixed[j] { format!("{est}=") } else { est };
                    let _ = write!(out, "{est:>CELL$}{se:>CELL$}  ");
                }
                None => {
                    let _ = write!(out, "{DASH:>CELL$}{DASH:>CELL$}  ");
                }
            }
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "{rule}");

    let _ = write!(out, "{:<label_w$}", "log-likelihood");
    for m in &report.models {
        let _ = write!(out, "{:>CELL$}{:CELL$}  ", format!("{:.3}", m.fit.log_likelihood), "");
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<label_w$}", "AIC");
    for m in &report.models {
        let best = report.lowest_aic.as_deref() == Some(m.fit.model.as_str());
        let text = format!("{:.3}", m.fit.aic);
        let cell = format!("{text:>CELL$}");
        let (mark, pad) = if best { (" *", CELL - 2) } else { ("", CELL) };
        if best && color {
            let _ = write!(out, "\x1b[1m{cell}{mark}\x1b[0m{:pad$}  ", "");
        } else {
            let _ = write!(out, "{cell}{mark}{:pad$}  ", "");
        }
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<label_w$}", "converged");
    for m in &report.models {
        let _ = write!(out, "{:>CELL$}{:CELL$}  ", if m.fit.converged { "yes" } else { "no" }, "");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "(* lowest AIC; = fixed, not estimated)");

    for m in &report.models {
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", m.heading());
        let _ = writeln!(
            out,
            "{:<label_w$}{:>CELL$}{:>CELL$}{:>CELL$}{:>CELL$}",
            "Coefficient", "Estimate", "SE", "z", "p"
        );
        for (j, name) in m.fit.names.iter().enumerate() {
            let est = format!("{:.4}", m.fit.estimates[j]);
            match &m.tests[j] {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "{name:<label_w$}{est:>CELL$}{:>CELL$}{:>CELL$}{:>CELL$}",
                        format!("{:.4}", w.standard_error),
                        format!("{:.3}", w.z),
                        fmt_p(w.p_value)
                    );
                }
                None => {
                    let _ = writeln!(out, "{name:<label_w$}{est:>CELL$}{DASH:>CELL$}{DASH:>CELL$}{DASH:>CELL$}");
                }
            }
        }
        let _ = writeln!(
            out,
            "log-likelihood {:.3}, AIC {:.3}, k = {}, iterations {}, gradient {:.2e}, {}",
            m.fit.log_likelihood,
            m.fit.aic,
            m.fit.k,
            m.fit.iterations,
            m.fit.gradient_norm,
            if m.fit.converged { "converged" } else { "NOT converged" }
        );
        for note in &m.fit.notes {
            let _ = writeln!(out, "note: {note}");
        }
    }
    trim_lines(out)
}

/// `model,tau,eta,prob` rows of the fitted response curve over `eta` in
/// [-5, 5], one block per model.
pub fn response_curves_csv(report: &FitReport) -> String {
    let mut out = String::from("model,tau,eta,prob\n");
    for m in &report.models {
        let tau = m.fit.tau();
        let link = match (m.fit.layout.family.link, tau) {
            (ResponseLink::Gev, Some(t)) => GevLink::new(t).ok(),
            _ => None,
        };
        for i in 0..=200 {
            let eta = -5.0 + 0.05 * i as f64;
            let prob = match (&link, m.fit.layout.family.link) {
                (Some(l), _) => response_prob(eta, l).map(|p| p.value()).unwrap_or(f64::NAN),
                (None, ResponseLink::Logit) => logistic(eta).value(),
                (None, ResponseLink::Gev) => f64::NAN,
            };
            let tau_text = tau.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{tau_text},{eta},{prob}", m.fit.model);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub immune_percent: u32,
    pub n: usize,
    pub report: SimulationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config: StudyConfig,
    pub cells: Vec<StudyCell>,
}

impl StudyReport {
    pub fn cell(&self, n: usize, immune_percent: u32) -> Option<&StudyCell> {
        self.cells.iter().find(|c| c.n == n && c.immune_percent == immune_percent)
    }
}

/// One table per estimator: rows n x {MLE, BIAS, RMSE}, columns the beta
/// coefficients grouped by immune percentage.
pub fn render_study(report: &StudyReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let beta = cfg.model.beta();
    let beta_text: Vec<String> = beta.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(
        out,
        "Simulation results for model {:?}: beta = ({}), tau = {}, N = {}, seed = {}",
        cfg.model,
        beta_text.join(", "),
        cfg.tau_true,
        cfg.replicates,
        report.seed
    );
    let mut percents: Vec<u32> = Vec::new();
    for c in &report.cells {
        if !percents.contains(&c.immune_percent) {
            percents.push(c.immune_percent);
        }
    }
    let mut sizes: Vec<usize> = Vec::new();
    for c in &report.cells {
        if !sizes.contains(&c.n) {
            sizes.push(c.n);
        }
    }
    let p = beta.len();
    const W: usize = 10;
    let group = W * p + 3;
    let Some(first) = report.cells.first() else {
        return out;
    };
    for est in &first.report.estimators {
        let _ = writeln!(out);
        let _ = writeln!(out, "Estimator: {}", est.label);
        let _ = write!(out, "{:<12}", "");
        for pc in &percents {
            let _ = write!(out, "{:<group$}", format!("   {pc}% of immune"));
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<7}{:<5}", "n", "");
        for _ in &percents {
            let _ = write!(out, "   ");
            for j in 1..=p {
                let _ = write!(out, "{:>W$}", format!("beta{j}"));
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", "-".repeat(12 + group * percents.len()));
        for &n in &sizes {
            for (k, stat) in ["MLE", "BIAS", "RMSE"].iter().enumerate() {
                let lead = if k == 0 { n.to_string() } else { String::new() };
                let _ = write!(out, "{lead:<7}{stat:<5}");
                for &pc in &percents {
                    let _ = write!(out, "   ");
                    let summary = report
                        .cell(n, pc)
                        .and_then(|c| c.report.estimators.iter().find(|e| e.estimator == est.estimator));
                    for j in 0..p {
                        let text = match summary {
                            Some(s) => {
                                let c = &s.coefficients[j];
                                format!("{:.3}", [c.mean, c.bias, c.rmse][k])
                            }
                            None => DASH.to_string(),
                        };
                        let _ = write!(out, "{text:>W$}");
                    }
                }
                let _ = writeln!(out);
            }
        }
    }
    let _ = writeln!(out);
    for c in &report.cells {
        let failures: Vec<String> = c
            .report
            .estimators
            .iter()
            .map(|e| format!("{} {}/{}", e.label, e.failures, c.report.replicates))
            .collect();
        let _ = writeln!(
            out,
            "n = {}, {}% of immune: realized immune fraction {:.4}, ones fraction {:.4}, failed fits: {}",
            c.n,
            c.immune_percent,
            c.report.mean_immune_fraction,
            c.report.mean_ones_fraction,
            failures.join(", ")
        );
    }
    trim_lines(out)
}
