use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Latent susceptibility status of one individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Susceptibility {
    Susceptible,
    Immune,
    Unknown,
}

/// Binary responses with the infection (X) and susceptibility (Z) design
/// matrices. The first column of each matrix is the intercept.
///
/// `s` is only populated for simulated data. Estimation never reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    y: Array1<f64>,
    x: Array2<f64>,
    z: Array2<f64>,
    s: Option<Vec<Susceptibility>>,
}

impl Dataset {
    pub fn new(y: Vec<u8>, x: Array2<f64>, z: Array2<f64>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no observations".into()));
        }
        if let Some(bad) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidData(format!(
                "response at row {bad} is {}, expected 0 or 1",
                y[bad]
            )));
        }
        for (label, m) in [("X", &x), ("Z", &z)] {
            if m.nrows() != n {
                return Err(Error::Dimension {
                    what: if label == "X" { "rows of X" } else { "rows of Z" },
                    expected: n,
                    got: m.nrows(),
                });
            }
            if m.ncols() == 0 {
                return Err(Error::InvalidData(format!("{label} has no columns")));
            }
            if let Some(i) = m.column(0).iter().position(|&v| v != 1.0) {
                return Err(Error::InvalidData(format!(
                    "intercept column of {label} is not 1 at row {i}"
                )));
            }
            if let Some(((i, j), _)) = m.indexed_iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "{label} has a non-finite entry at row {i}, column {j}"
                )));
            }
        }
        Ok(Self {
            y: y.into_iter().map(f64::from).collect(),
            x,
            z,
            s: None,
        })
    }

    /// Attaches ground-truth susceptibility (simulated data).
    pub fn with_susceptibility(mut self, s: Vec<Susceptibility>) -> Result<Self> {
        if s.len() != self.n() {
            return Err(Error::Dimension {
                what: "susceptibility vector",
                expected: self.n(),
                got: s.len(),
            });
        }
        if let Some(i) = s
            .iter()
            .zip(self.y.iter())
            .position(|(s, &y)| *s == Susceptibility::Immune && y == 1.0)
        {
            return Err(Error::InvalidData(format!(
                "row {i} is marked immune but has y = 1"
            )));
        }
        self.s = Some(s);
        Ok(self)
    }

    /// A copy in which susceptibility is hidden wherever `y = 0`.
    pub fn estimation_view(&self) -> Self {
        let s = self.s.as_ref().map(|s| {
            s.iter()
                .zip(self.y.iter())
                .map(|(&s, &y)| if y == 0.0 { Susceptibility::Unknown } else { s })
                .collect()
        });
        Self {
            y: self.y.clone(),
            x: self.x.clone(),
            z: self.z.clone(),
            s,
        }
    }

    /// Same data with the susceptibility column dropped.
    pub fn without_susceptibility(&self) -> Self {
        Self {
            s: None,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.z.ncols()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn susceptibility(&self) -> Option<&[Susceptibility]> {
        self.s.as_deref()
    }

    pub fn ones(&self) -> usize {
        self.y.iter().filter(|&&v| v == 1.0).count()
    }

    pub fn ones_fraction(&self) -> f64 {
        self.ones() as f64 / self.n() as f64
    }

    /// Fraction of ground-truth immunes, if the truth is known for every row.
    pub fn immune_fraction(&self) -> Option<f64> {
        let s = self.s.as_ref()?;
        if s.contains(&Susceptibility::Unknown) {
            return None;
        }
        let immune = s.iter().filter(|&&v| v == Susceptibility::Immune).count();
        Some(immune as f64 / self.n() as f64)
    }

    /// Rows reordered (or subset) by index.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            y: rows.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select(Axis(0), rows),
            z: self.z.select(Axis(0), rows),
            s: self.s.as_ref().map(|s| rows.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stacked(&self, other: &Self) -> Result<Self> {
        if self.p() != other.p() || self.q() != other.q() {
            return Err(Error::InvalidData("cannot stack datasets of different widths".into()));
        }
        let y = self.y.iter().chain(other.y.iter()).map(|&v| v as u8).collect();
        let x = ndarray::concatenate(Axis(0), &[self.x.view(), other.x.view()])
            .expect("widths checked");
        let z = ndarray::concatenate(Axis(0), &[self.z.view(), other.z.view()])
            .expect("widths checked");
        Dataset::new(y, x, z)
    }
}
