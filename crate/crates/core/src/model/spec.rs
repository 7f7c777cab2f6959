use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub const INTERCEPT: &str = "(Intercept)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Intercept,
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    pub kind: CovariateKind,
}

impl Covariate {
    pub fn intercept() -> Self {
        Self {
            name: INTERCEPT.to_string(),
            kind: CovariateKind::Intercept,
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Continuous,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Categorical,
        }
    }
}

/// Covariates entering the infection (X) and susceptibility (Z) predictors.
///
/// Both lists start with the intercept. X and Z may share covariates, but at
/// least one continuous covariate must appear in exactly one of them for the
/// joint model to be identifiable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub x: Vec<Covariate>,
    pub z: Vec<Covariate>,
}

impl ModelSpec {
    pub fn new(x: Vec<Covariate>, z: Vec<Covariate>) -> Self {
        Self { x, z }
    }

    /// Builds a spec by prepending an intercept to each list.
    pub fn with_intercepts(
        x: impl IntoIterator<Item = Covariate>,
        z: impl IntoIterator<Item = Covariate>,
    ) -> Self {
        let x = std::iter::once(Covariate::intercept()).chain(x).collect();
        let z = std::iter::once(Covariate::intercept()).chain(z).collect();
        Self { x, z }
    }

    /// Shorthand for all-continuous covariates given by name.
    pub fn continuous(x: &[&str], z: &[&str]) -> Self {
        Self::with_intercepts(
            x.iter().map(|n| Covariate::continuous(*n)),
            z.iter().map(|n| Covariate::continuous(*n)),
        )
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn q(&self) -> usize {
        self.z.len()
    }

    pub fn x_names(&self) -> Vec<String> {
        self.x.iter().map(|c| c.name.clone()).collect()
    }

    pub fn z_names(&self) -> Vec<String> {
        self.z.iter().map(|c| c.name.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionSide {
    /// In X (infection) but not in Z.
    InfectionOnly,
    /// In Z (susceptibility) but not in X.
    SusceptibilityOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionCovariate {
    pub name: String,
    pub side: ExclusionSide,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// The covariate playing the role of the exclusion variable V.
    pub exclusion: Option<ExclusionCovariate>,
    /// Every continuous covariate that could serve as V, sorted by name.
    pub candidates: Vec<ExclusionCovariate>,
    pub problems: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            let v = self.exclusion.as_ref().expect("passing report names V");
            let side = match v.side {
                ExclusionSide::InfectionOnly => "infection predictor only",
                ExclusionSide::SusceptibilityOnly => "susceptibility predictor only",
            };
            write!(f, "identifiable: '{}' is the exclusion covariate ({side})", v.name)
        } else {
            write!(f, "identifiability at risk: {}", self.problems.join("; "))
        }
    }
}

/// Checks the structural requirements of a spec and looks for the
/// continuous exclusion covariate V.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let mut problems = Vec::new();

    for (label, list) in [("infection (X)", &spec.x), ("susceptibility (Z)", &spec.z)] {
        match list.first() {
            None => problems.push(format!("{label} covariate list is empty")),
            Some(c) if c.kind != CovariateKind::Intercept => {
                problems.push(format!("{label} covariate list must begin with the intercept"))
            }
            _ => {}
        }
        let mut seen = BTreeMap::new();
        for c in list.iter() {
            if seen.insert(c.name.as_str(), ()).is_some() {
                problems.push(format!("{label} lists '{}' more than once", c.name));
            }
            if c.kind == CovariateKind::Intercept && c.name != INTERCEPT {
                problems.push(format!("{label}: only '{INTERCEPT}' may be an intercept"));
            }
        }
    }

    let x_kinds: BTreeMap<&str, CovariateKind> =
        spec.x.iter().map(|c| (c.name.as_str(), c.kind)).collect();
    let z_kinds: BTreeMap<&str, CovariateKind> =
        spec.z.iter().map(|c| (c.name.as_str(), c.kind)).collect();

    for (name, kx) in &x_kinds {
        if let Some(kz) = z_kinds.get(name) {
            if kz != kx {
                problems.push(format!("'{name}' has different kinds in X and Z"));
            }
        }
    }

    let mut candidates: Vec<ExclusionCovariate> = x_kinds
        .iter()
        .filter(|(n, k)| **k == CovariateKind::Continuous && !z_kinds.contains_key(*n))
        .map(|(n, _)| ExclusionCovariate {
            name: n.to_string(),
            side: ExclusionSide::InfectionOnly,
        })
        .chain(
            z_kinds
                .iter()
                .filter(|(n, k)| **k == CovariateKind::Continuous && !x_kinds.contains_key(*n))
                .map(|(n, _)| ExclusionCovariate {
                    name: n.to_string(),
                    side: ExclusionSide::SusceptibilityOnly,
                }),
        )
        .collect();
    candidates.sort_by(|a, b| a.name.cmp(&b.name).then(a.side.cmp(&b.side)));

    if candidates.is_empty() {
        problems.push(
            "no continuous covariate appears in exactly one of X and Z \
             (every continuous covariate is shared, or none exists)"
                .to_string(),
        );
    }

    let passed = problems.is_empty();
    ValidationReport {
        passed,
        exclusion: if passed { candidates.first().cloned() } else { None },
        candidates,
        problems,
    }
}
