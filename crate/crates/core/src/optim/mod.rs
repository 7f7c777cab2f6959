//! Box-bounded minimizers selected by name.

mod bfgs;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bfgs::QuasiNewton;
pub use simplex::Simplex;

/// A smooth function to minimize.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Value and gradient at `x`.
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }
}

/// Per-coordinate box constraints; unbounded coordinates use infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn with(mut self, j: usize, lower: f64, upper: f64) -> Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn clip(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Gradient with components zeroed where a bound blocks descent.
    pub fn projected_gradient(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        g.iter()
            .enumerate()
            .map(|(j, &gj)| {
                if (x[j] <= self.lower[j] && gj > 0.0) || (x[j] >= self.upper[j] && gj < 0.0) {
                    0.0
                } else {
                    gj
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Stop once the projected gradient's infinity norm is below this.
    pub gradient_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
    LineSearchFailed,
    SimplexCollapsed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: Status,
}

pub trait Minimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn minimize(
        &self,
        objective: &dyn Objective,
        x0: &[f64],
        bounds: &Bounds,
        options: &MinimizeOptions,
    ) -> MinimizeOutcome;
}

/// Name → minimizer lookup.
pub struct MinimizerRegistry {
    entries: Vec<Box<dyn Minimizer>>,
}

impl MinimizerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(QuasiNewton));
        r.register(Box::new(Simplex));
        r
    }

    /// Adds a minimizer, replacing any existing entry of the same name.
    pub fn register(&mut self, m: Box<dyn Minimizer>) {
        self.entries.retain(|e| e.name() != m.name());
        self.entries.push(m);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Minimizer> {
        self.entries
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "optimizer",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|m| m.name()).collect()
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
pub(crate) mod test_functions {
    use super::Objective;

    pub struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let (a, b) = (1.0, 100.0);
            let f = (a - x[0]).powi(2) + b * (x[1] - x[0] * x[0]).powi(2);
            let g = vec![
                -2.0 * (a - x[0]) - 4.0 * b * (x[1] - x[0] * x[0]) * x[0],
                2.0 * b * (x[1] - x[0] * x[0]),
            ];
            (f, g)
        }
    }

    /// Sum of (x_j - c_j)^2 scaled by j + 1.
    pub struct Bowl(pub Vec<f64>);

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let mut f = 0.0;
            let mut g = vec![0.0; x.len()];
            for (j, (xj, cj)) in x.iter().zip(&self.0).enumerate() {
                let w = (j + 1) as f64;
                f += w * (xj - cj).powi(2);
                g[j] = 2.0 * w * (xj - cj);
            }
            (f, g)
        }
    }
}
