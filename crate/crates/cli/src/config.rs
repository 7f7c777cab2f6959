//! JSON run configurations for `fit` and `simulate`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use zigev_core::inference::FitConfig;
use zigev_core::simulation::{ModelPreset, ScenarioPreset, SimulationConfig, DEFAULT_TAU_TRUE};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub response: String,
    pub x_columns: Vec<String>,
    #[serde(default)]
    pub z_columns: Vec<String>,
    /// Columns to reference-code; all others are numeric.
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_models() -> Vec<String> {
    vec!["m0".into(), "m1".into(), "m2".into()]
}

impl RunConfig {
    fn template() -> Self {
        Self {
            input: PathBuf::new(),
            response: String::new(),
            x_columns: Vec::new(),
            z_columns: Vec::new(),
            categorical: Vec::new(),
            models: default_models(),
            fit: FitConfig::default(),
            strict: false,
            output_dir: None,
        }
    }

    /// Reads a config file. A relative `input` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = load_checked(path, &Self::template())?;
        if cfg.input.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.input = dir.join(&cfg.input);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub model: ModelPreset,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<ScenarioPreset>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tau")]
    pub tau_true: f64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<String>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_scenarios() -> Vec<ScenarioPreset> {
    vec![ScenarioPreset::Scenario1]
}

fn default_sizes() -> Vec<usize> {
    vec![500]
}

fn default_replicates() -> usize {
    200
}

fn default_tau() -> f64 {
    DEFAULT_TAU_TRUE
}

fn default_estimators() -> Vec<String> {
    vec!["zi-gev".into()]
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            model: ModelPreset::M1,
            scenarios: default_scenarios(),
            sizes: default_sizes(),
            replicates: default_replicates(),
            seed: 0,
            tau_true: default_tau(),
            estimators: default_estimators(),
            fit: FitConfig::default(),
            output_dir: None,
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        load_checked(path, &Self::default())
    }

    /// Parses a comma-separated preset such as `M1,Scenario1,n=500,N=50,seed=7`.
    ///
    /// Tokens: `M1`/`M2`; `Scenario1`/`Scenario2` (or `S1`/`S2`, repeatable);
    /// `n=<size>` (repeatable); `N=<replicates>`; `seed=<u64>`; `tau=<f64>`;
    /// `estimators=<a+b+..>`.
    pub fn from_preset(preset: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        let (mut scenarios, mut sizes) = (Vec::new(), Vec::new());
        let bad = |t: &str| CliError::Usage(format!("bad preset token '{t}' in '{preset}'"));
        for token in preset.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some((key, value)) = token.split_once('=') {
                match key.trim() {
                    "n" => sizes.push(value.trim().parse().map_err(|_| bad(token))?),
                    "N" => cfg.replicates = value.trim().parse().map_err(|_| bad(token))?,
                    "seed" => cfg.seed = value.trim().parse().map_err(|_| bad(token))?,
                    "tau" => cfg.tau_true = value.trim().parse().map_err(|_| bad(token))?,
                    "estimators" => {
                        cfg.estimators = value.split('+').map(|s| s.trim().to_string()).collect()
                    }
                    _ => return Err(bad(token)),
                }
            } else if let Ok(m) = token.parse::<ModelPreset>() {
                cfg.model = m;
            } else if let Ok(s) = token.parse::<ScenarioPreset>() {
                scenarios.push(s);
            } else {
                return Err(bad(token));
            }
        }
        if !scenarios.is_empty() {
            cfg.scenarios = scenarios;
        }
        if !sizes.is_empty() {
            cfg.sizes = sizes;
        }
        Ok(cfg)
    }

    /// One simulation per (size, scenario), sizes outermost.
    pub fn cells(&self) -> Vec<(ScenarioPreset, SimulationConfig)> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for &s in &self.scenarios {
                let mut c = SimulationConfig::preset(self.model, s, n, self.replicates, self.seed);
                c.tau_true = self.tau_true;
                c.estimators = self.estimators.clone();
                c.fit = self.fit.clone();
                out.push((s, c));
            }
        }
        out
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.scenarios.is_empty() || self.sizes.is_empty() {
            return Err(CliError::Usage("a study needs at least one scenario and one size".into()));
        }
        for (_, c) in self.cells() {
            c.validate()?;
        }
        Ok(())
    }
}

/// Parses `path` as JSON, rejecting keys that `template` does not have, at the
/// top level and inside a nested `fit` object.
fn load_checked<T: Serialize + DeserializeOwned>(path: &Path, template: &T) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_json_checked(&text, template).map_err(|m| CliError::parse(path, m))
}

pub(crate) fn from_json_checked<T: Serialize + DeserializeOwned>(
    text: &str,
    template: &T,
) -> Result<T, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let known = serde_json::to_value(template).expect("config serializes");
    let mut unknown = Vec::new();
    collect_unknown(&value, &known, "", &mut unknown)?;
    if !unknown.is_empty() {
        return Err(format!("unknown configuration key(s): {}", unknown.join(", ")));
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}

fn collect_unknown(value: &Value, known: &Value, prefix: &str, out: &mut Vec<String>) -> Result<(), String> {
    let (Value::Object(v), Value::Object(k)) = (value, known) else {
        if prefix.is_empty() {
            return Err("configuration must be a JSON object".into());
        }
        return Ok(());
    };
    for (key, child) in v {
        match k.get(key) {
            None => out.push(format!("{prefix}{key}")),
            Some(kc) if key == "fit" => collect_unknown(child, kc, "fit.", out)?,
            Some(_) => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_defaults_and_unknown_keys() {
        let cfg: RunConfig =
            from_json_checked(r#"{"input":"d.csv","response":"y","x_columns":["w"]}"#, &RunConfig::template())
                .unwrap();
        assert_eq!(cfg.models, vec!["m0", "m1", "m2"]);
        assert!(cfg.z_columns.is_empty());

        let err = from_json_checked::<RunConfig>(
            r#"{"input":"d.csv","response":"y","x_columns":[],"colour":1,"fit":{"seeed":3,"seed":1}}"#,
            &RunConfig::template(),
        )
        .unwrap_err();
        assert!(err.contains("colour") && err.contains("fit.seeed"), "{err}");
        assert!(from_json_checked::<RunConfig>("[1]", &RunConfig::template()).is_err());
    }

    #[test]
    fn preset_parsing() {
        let c = StudyConfig::from_preset("M1,Scenario1,n=500,N=50,seed=7").unwrap();
        assert_eq!(c.model, ModelPreset::M1);
        assert_eq!(c.scenarios, vec![ScenarioPreset::Scenario1]);
        assert_eq!((c.sizes.clone(), c.replicates, c.seed), (vec![500], 50, 7));

        let c = StudyConfig::from_preset("M2,S1,S2,n=100,n=200,estimators=zi-gev+gev,tau=0.1").unwrap();
        assert_eq!(c.cells().len(), 4);
        assert_eq!(c.estimators, vec!["zi-gev", "gev"]);
        assert_eq!(c.tau_true, 0.1);
        assert!(StudyConfig::from_preset("M3").is_err());
        assert!(StudyConfig::from_preset("M1,n=abc").is_err());
    }

    #[test]
    fn study_config_json() {
        let c: StudyConfig =
            from_json_checked(r#"{"model":"M2","sizes":[100],"replicates":3}"#, &StudyConfig::default()).unwrap();
        assert_eq!(c.model, ModelPreset::M2);
        assert!(c.validate().is_ok());
        assert!(from_json_checked::<StudyConfig>(r#"{"model":"M2","size":[1]}"#, &StudyConfig::default()).is_err());
    }
}
