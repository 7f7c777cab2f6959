//! Bernoulli log-likelihood shared by the ZI-GEV model and its naive
//! baselines, with the analytic gradient.
//!
//! For row `i` with `eta = x_i'beta` and `a = z_i'theta`, the event
//! probability is `mu = pi(eta) * s(a)` where `pi` is the response curve and
//! `s` the logistic susceptibility probability (`s = 1` without a cure part).
//! `mu` is clamped to `[PROB_EPS, 1 - PROB_EPS]` inside the logarithms; a
//! clamped row contributes no gradient.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{logistic_f64, response_eval, PROB_EPS};
use crate::model::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseLink {
    Gev,
    Logit,
}

/// Which pieces make up the event probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub link: ResponseLink,
    pub cure: bool,
}

impl Family {
    pub const ZI_GEV: Family = Family {
        link: ResponseLink::Gev,
        cure: true,
    };
    pub const GEV: Family = Family {
        link: ResponseLink::Gev,
        cure: false,
    };
    pub const LOGISTIC: Family = Family {
        link: ResponseLink::Logit,
        cure: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamRole {
    Beta,
    Theta,
    Tau,
}

/// Flat parameter ordering: `beta` (p), then `theta` (q, cure only), then
/// `tau` (GEV link only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub family: Family,
    pub p: usize,
    pub q: usize,
}

impl ParamLayout {
    pub fn new(family: Family, p: usize, q: usize) -> Self {
        Self {
            family,
            p,
            q: if family.cure { q } else { 0 },
        }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q + usize::from(self.has_tau())
    }

    pub fn has_tau(&self) -> bool {
        self.family.link == ResponseLink::Gev
    }

    pub fn tau_index(&self) -> Option<usize> {
        self.has_tau().then_some(self.p + self.q)
    }

    pub fn role(&self, j: usize) -> ParamRole {
        if j < self.p {
            ParamRole::Beta
        } else if j < self.p + self.q {
            ParamRole::Theta
        } else {
            ParamRole::Tau
        }
    }

    pub fn beta<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[..self.p]
    }

    pub fn theta<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.p..self.p + self.q]
    }

    pub fn tau(&self, params: &[f64]) -> Option<f64> {
        self.tau_index().map(|j| params[j])
    }

    /// Parameter names, e.g. `beta:Weight`, `theta:(Intercept)`, `tau`.
    pub fn names(&self, x_names: &[String], z_names: &[String]) -> Vec<String> {
        let mut out: Vec<String> = x_names.iter().map(|n| format!("beta:{n}")).collect();
        if self.family.cure {
            out.extend(z_names.iter().map(|n| format!("theta:{n}")));
        }
        if self.has_tau() {
            out.push("tau".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodEval {
    pub log_likelihood: f64,
    /// Gradient in layout order. Rows on the support boundary contribute
    /// their one-sided (zero) derivative.
    pub gradient: Option<Vec<f64>>,
    pub boundary_rows: Vec<usize>,
    pub clamped_rows: usize,
}

/// Log-likelihood (and optionally gradient) of `params` under `layout`.
pub fn evaluate(
    layout: &ParamLayout,
    params: &[f64],
    data: &Dataset,
    with_gradient: bool,
) -> Result<LikelihoodEval> {
    check_dims(layout, params, data)?;
    let ParamLayout { family, p, q } = *layout;
    let beta = ArrayView1::from(layout.beta(params));
    let theta = ArrayView1::from(layout.theta(params));
    let tau = layout.tau(params).unwrap_or(0.0);
    let tau_idx = layout.tau_index();

    let x = data.x();
    let z = data.z();
    let y = data.y();

    let mut ll = 0.0;
    let mut grad = if with_gradient {
        Some(vec![0.0; layout.dim()])
    } else {
        None
    };
    let mut boundary_rows = Vec::new();
    let mut clamped_rows = 0;
    let ln_eps = PROB_EPS.ln();
    let ln_1m_eps = (-PROB_EPS).ln_1p();

    for i in 0..data.n() {
        let xi = x.row(i);
        let eta = xi.dot(&beta);
        let (pi, pi_c, d_eta, d_tau) = match family.link {
            ResponseLink::Gev => {
                let e = response_eval(eta, tau);
                if e.boundary {
                    boundary_rows.push(i);
                }
                (e.prob, e.complement, e.d_eta, e.d_tau)
            }
            ResponseLink::Logit => {
                let m = logistic_f64(eta);
                let mc = logistic_f64(-eta);
                (m, mc, m * mc, 0.0)
            }
        };
        let (s, s_c) = if family.cure {
            let a = z.row(i).dot(&theta);
            (logistic_f64(a), logistic_f64(-a))
        } else {
            (1.0, 0.0)
        };
        let mu = pi * s;
        let mu_c = pi_c + pi * s_c;
        let event = y[i] == 1.0;

        if mu < PROB_EPS || mu_c < PROB_EPS {
            clamped_rows += 1;
            // clamped mu is PROB_EPS (low) or 1 - PROB_EPS
            let low = mu < PROB_EPS;
            ll += if event == low { ln_eps } else { ln_1m_eps };
            continue;
        }

        // (d log L_i / d pi, d log L_i / d a)
        let (g_pi, g_a) = if event {
            ll += mu.ln();
            (1.0 / pi, s_c)
        } else {
            ll += mu_c.ln();
            (-s / mu_c, -pi * s * s_c / mu_c)
        };

        if let Some(g) = grad.as_mut() {
            let ge = g_pi * d_eta;
            if ge != 0.0 {
                for (gj, xij) in g[..p].iter_mut().zip(xi.iter()) {
                    *gj += ge * xij;
                }
            }
            if family.cure && g_a != 0.0 {
                for (gj, zij) in g[p..p + q].iter_mut().zip(z.row(i).iter()) {
                    *gj += g_a * zij;
                }
            }
            if let Some(t) = tau_idx {
                g[t] += g_pi * d_tau;
            }
        }
    }

    Ok(LikelihoodEval {
        log_likelihood: ll,
        gradient: grad,
        boundary_rows,
        clamped_rows,
    })
}

fn check_dims(layout: &ParamLayout, params: &[f64], data: &Dataset) -> Result<()> {
    if params.len() != layout.dim() {
        return Err(Error::Dimension {
            what: "parameter vector",
            expected: layout.dim(),
            got: params.len(),
        });
    }
    if data.p() != layout.p {
        return Err(Error::Dimension {
            what: "columns of X",
            expected: layout.p,
            got: data.p(),
        });
    }
    if layout.family.cure && data.q() != layout.q {
        return Err(Error::Dimension {
            what: "columns of Z",
            expected: layout.q,
            got: data.q(),
        });
    }
    if let Some(j) = params.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("parameter {j} is not finite")));
    }
    Ok(())
}
