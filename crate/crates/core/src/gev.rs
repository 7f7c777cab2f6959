//! GEV distribution function, the GEV response curve used as a binary link,
//! its inverse, and the logistic function.
//!
//! The response curve is `pi(eta) = 1 - exp(-[(1 - tau * eta)_+]^(-1/tau))`,
//! i.e. `1 - G(-eta)` for the standard GEV distribution function `G` with
//! location 0 and scale 1. As `tau -> 0` it becomes the complementary log-log
//! curve `1 - exp(-exp(eta))`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Below this magnitude the shape is treated as exactly zero (Gumbel / cloglog).
pub const TAU_ZERO: f64 = 1e-8;

/// Default bound on `|tau|` for a valid link.
pub const DEFAULT_TAU_BOUND: f64 = 20.0;

/// Interior clamp used wherever a probability enters a logarithm.
pub const PROB_EPS: f64 = 1e-12;

/// `|tau*eta|` below which `d log w / d tau` is evaluated by its power series.
const SERIES_CUTOFF: f64 = 0.05;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("probability {value} outside [0, 1]")))
        }
    }

    #[inline]
    pub(crate) fn saturating(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }

    /// The value clamped into `[PROB_EPS, 1 - PROB_EPS]`.
    #[inline]
    pub fn clamped(self) -> f64 {
        self.0.clamp(PROB_EPS, 1.0 - PROB_EPS)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Location, scale and shape of a GEV distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, tau: f64) -> Result<Self> {
        let params = Self { mu, sigma, tau };
        params.validate()?;
        Ok(params)
    }

    /// Location 0 and scale 1, the only configuration used by the link.
    pub fn standard(tau: f64) -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.tau.is_finite()) {
            return Err(Error::Domain("GEV location and shape must be finite".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Domain(format!(
                "GEV scale must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Skewness class of the GEV response curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Skewness {
    Negative,
    ApproximatelySymmetric,
    Positive,
}

/// Shape value at which the response curve is approximately symmetric.
pub fn symmetric_tau() -> f64 {
    std::f64::consts::LN_2 - 1.0
}

/// The GEV link with shape `tau` (location 0, scale 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevLink {
    tau: f64,
}

impl GevLink {
    pub fn new(tau: f64) -> Result<Self> {
        Self::with_bound(tau, DEFAULT_TAU_BOUND)
    }

    pub fn with_bound(tau: f64, bound: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("link shape must be finite, got {tau}")));
        }
        if tau.abs() > bound {
            return Err(Error::Domain(format!(
                "link shape {tau} exceeds the bound |tau| <= {bound}"
            )));
        }
        Ok(Self { tau })
    }

    /// The complementary log-log member of the family.
    pub fn cloglog() -> Self {
        Self { tau: 0.0 }
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn skewness(&self) -> Skewness {
        let t0 = symmetric_tau();
        if (self.tau - t0).abs() < 1e-9 {
            Skewness::ApproximatelySymmetric
        } else if self.tau < t0 {
            Skewness::Negative
        } else {
            Skewness::Positive
        }
    }

    /// `pi(eta)` together with its partial derivatives.
    pub fn evaluate(&self, eta: f64) -> ResponseEval {
        response_eval(eta, self.tau)
    }
}

/// `G(x | mu, sigma, tau)`.
pub fn gev_cdf(x: f64, params: &GevParams) -> Result<Probability> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("gev_cdf argument must be finite, got {x}")));
    }
    let t = (x - params.mu) / params.sigma;
    let tau = params.tau;
    let value = if tau.abs() < TAU_ZERO {
        (-(-t).exp()).exp()
    } else {
        let v = 1.0 + tau * t;
        if v <= 0.0 {
            if tau > 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            (-(-(tau * t).ln_1p() / tau).exp()).exp()
        }
    };
    Ok(Probability::saturating(value))
}

/// `pi(eta) = 1 - G(-eta; tau)`.
pub fn response_prob(eta: f64, link: &GevLink) -> Result<Probability> {
    if !eta.is_finite() {
        return Err(Error::Domain(format!("linear predictor must be finite, got {eta}")));
    }
    Ok(Probability::saturating(response_eval(eta, link.tau).prob))
}

/// Inverse of [`response_prob`]: the linear predictor giving probability `pi`.
pub fn link_eta(pi: Probability, link: &GevLink) -> Result<f64> {
    let p = pi.value();
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!(
            "link_eta needs a probability strictly inside (0, 1), got {p}"
        )));
    }
    // w = -log(1 - pi) > 0
    let w = -(-p).ln_1p();
    let tau = link.tau;
    if tau.abs() < TAU_ZERO {
        Ok(w.ln())
    } else {
        Ok(-(-tau * w.ln()).exp_m1() / tau)
    }
}

/// `e^a / (1 + e^a)` without overflow.
#[inline]
pub fn logistic(a: f64) -> Probability {
    Probability::saturating(logistic_f64(a))
}

#[inline]
pub(crate) fn logistic_f64(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Value and first derivatives of the response curve at one linear predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseEval {
    /// `pi(eta)`.
    pub prob: f64,
    /// `1 - pi(eta)`, computed without cancellation.
    pub complement: f64,
    /// `d pi / d eta`.
    pub d_eta: f64,
    /// `d pi / d tau`.
    pub d_tau: f64,
    /// True when `1 - tau * eta <= 0`, where `pi` is pinned at 0 or 1.
    pub boundary: bool,
}

pub(crate) fn response_eval(eta: f64, tau: f64) -> ResponseEval {
    let a = tau * eta;
    let (log_w, u) = if tau.abs() < TAU_ZERO {
        (eta, 1.0)
    } else {
        let u = 1.0 - a;
        if u <= 0.0 {
            let prob = if tau > 0.0 { 1.0 } else { 0.0 };
            return ResponseEval {
                prob,
                complement: 1.0 - prob,
                d_eta: 0.0,
                d_tau: 0.0,
                boundary: true,
            };
        }
        (-(-a).ln_1p() / tau, u)
    };
    let w = log_w.exp();
    let complement = (-w).exp();
    let prob = -(-w).exp_m1();
    // d pi / d log w = w * exp(-w)
    let scale = if complement == 0.0 || w == 0.0 {
        0.0
    } else {
        w * complement
    };
    let d_eta = scale / u;
    let d_tau = scale * dlogw_dtau(eta, tau, a, u);
    ResponseEval {
        prob,
        complement,
        d_eta,
        d_tau,
        boundary: false,
    }
}

/// `d/d tau` of `log w = -log(1 - tau*eta)/tau`.
fn dlogw_dtau(eta: f64, tau: f64, a: f64, u: f64) -> f64 {
    if a.abs() < SERIES_CUTOFF {
        // log w = sum_{k>=1} tau^(k-1) eta^k / k
        // d/dtau = sum_{k>=2} (k-1)/k tau^(k-2) eta^k
        let mut term = eta * eta; // tau^(k-2) eta^k at k = 2
        let mut sum = 0.0;
        for k in 2..=16 {
            let kf = k as f64;
            sum += (kf - 1.0) / kf * term;
            term *= a;
        }
        sum
    } else {
        u.ln() / (tau * tau) + eta / (tau * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn cdf_examples() {
        let p = gev_cdf(0.0, &GevParams::standard(0.0)).unwrap();
        assert_abs_diff_eq!(p.value(), E_INV, epsilon = 1e-15);
        let p = gev_cdf(0.0, &GevParams::standard(0.5)).unwrap();
        assert_abs_diff_eq!(p.value(), E_INV, epsilon = 1e-15);
        let p = gev_cdf(-1.0, &GevParams::standard(1.0)).unwrap();
        assert_eq!(p.value(), 0.0);
        // right endpoint for negative shape
        let p = gev_cdf(1.0, &GevParams::standard(-1.0)).unwrap();
        assert_eq!(p.value(), 1.0);
    }

    #[test]
    fn cdf_rejects_bad_input() {
        assert!(gev_cdf(f64::NAN, &GevParams::standard(0.1)).is_err());
        assert!(gev_cdf(0.0, &GevParams { mu: 0.0, sigma: 0.0, tau: 0.1 }).is_err());
        assert!(GevParams::new(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn cdf_nondecreasing() {
        for &tau in &[-2.0, -0.5, 0.0, 0.3, 1.0, 4.0] {
            let params = GevParams::standard(tau);
            let mut prev = 0.0;
            for i in 0..=400 {
                let x = -10.0 + 0.05 * i as f64;
                let p = gev_cdf(x, &params).unwrap().value();
                assert!(p >= prev, "tau={tau} x={x}");
                prev = p;
            }
        }
    }

    #[test]
    fn response_at_zero_is_one_minus_inv_e() {
        for &tau in &[-3.0, -0.4, 0.0, 1e-9, 0.7, 4.278, 15.0] {
            let p = response_prob(0.0, &GevLink::new(tau).unwrap()).unwrap();
            assert_abs_diff_eq!(p.value(), 1.0 - E_INV, epsilon = 1e-12);
        }
    }

    #[test]
    fn response_is_one_minus_cdf_of_negated_predictor() {
        for &tau in &[-1.5, -0.2, 0.0, 0.25, 3.0] {
            let link = GevLink::new(tau).unwrap();
            for i in 0..40 {
                let eta = -4.0 + 0.2 * i as f64;
                let cdf = gev_cdf(-eta, &GevParams::standard(tau)).unwrap().value();
                let pi = response_prob(eta, &link).unwrap().value();
                assert_abs_diff_eq!(pi, 1.0 - cdf, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn response_boundaries() {
        let link = GevLink::new(0.5).unwrap();
        assert_eq!(response_prob(2.0, &link).unwrap().value(), 1.0);
        assert_eq!(response_prob(3.0, &link).unwrap().value(), 1.0);
        let link = GevLink::new(-0.5).unwrap();
        assert_eq!(response_prob(-2.0, &link).unwrap().value(), 0.0);
        assert!(link.evaluate(-2.5).boundary);
    }

    #[test]
    fn response_matches_dengue_weight_15() {
        // Intercept 1.5379, Weight -0.1003, tau 4.278: eta = 0.0334
        let link = GevLink::new(4.278).unwrap();
        let p = response_prob(1.5379 - 0.1003 * 15.0, &link).unwrap().value();
        assert_abs_diff_eq!(p, 0.6454, epsilon = 1e-3);
    }

    #[test]
    fn cloglog_limit() {
        let link = GevLink::cloglog();
        for &eta in &[-3.0, -0.5, 0.0, 0.8, 2.0] {
            let p = response_prob(eta, &link).unwrap().value();
            assert_abs_diff_eq!(p, 1.0 - (-eta.exp()).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn link_eta_examples() {
        let link = GevLink::new(0.7).unwrap();
        let p = Probability::new(1.0 - E_INV).unwrap();
        assert_abs_diff_eq!(link_eta(p, &link).unwrap(), 0.0, epsilon = 1e-14);

        let link = GevLink::new(-0.4).unwrap();
        let p = response_prob(1.3, &link).unwrap();
        assert_abs_diff_eq!(link_eta(p, &link).unwrap(), 1.3, epsilon = 1e-10);

        assert!(link_eta(Probability::new(0.0).unwrap(), &link).is_err());
        assert!(link_eta(Probability::new(1.0).unwrap(), &link).is_err());
    }

    #[test]
    fn link_eta_inverts_dengue_probability() {
        // Bisection oracle on the response curve.
        let link = GevLink::new(4.278).unwrap();
        let target = 0.6454;
        let (mut lo, mut hi) = (-5.0_f64, 1.0 / 4.278 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if response_prob(mid, &link).unwrap().value() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert_abs_diff_eq!(oracle, 0.0334, epsilon = 1e-3);
        let eta = link_eta(Probability::new(target).unwrap(), &link).unwrap();
        assert_abs_diff_eq!(eta, oracle, epsilon = 1e-10);
    }

    #[test]
    fn logistic_examples() {
        assert_eq!(logistic(0.0).value(), 0.5);
        let p = logistic(-0.3667);
        assert_abs_diff_eq!(p.value(), 0.4093, epsilon = 5e-4);
        assert_abs_diff_eq!(p.complement(), 0.5907, epsilon = 5e-4);
        for &a in &[-30.0, -1.0, 0.0, 2.0, 30.0] {
            assert_abs_diff_eq!(logistic(a).value() + logistic(-a).value(), 1.0, epsilon = 1e-15);
        }
        assert!(logistic(1000.0).value() == 1.0);
        assert!(logistic(-1000.0).value() == 0.0);
    }

    #[test]
    fn skewness_classes() {
        let t0 = symmetric_tau();
        assert_eq!(GevLink::new(t0).unwrap().skewness(), Skewness::ApproximatelySymmetric);
        assert_eq!(GevLink::new(t0 - 0.1).unwrap().skewness(), Skewness::Negative);
        assert_eq!(GevLink::new(t0 + 0.1).unwrap().skewness(), Skewness::Positive);
    }

    #[test]
    fn link_rejects_out_of_bound_shape() {
        assert!(GevLink::new(25.0).is_err());
        assert!(GevLink::new(f64::INFINITY).is_err());
        assert!(GevLink::with_bound(25.0, 30.0).is_ok());
    }

    #[test]
    fn derivatives_match_central_differences() {
        for &tau in &[-1.2, -0.3, -1e-5, 0.0, 2e-7, 0.02, 0.25, 1.7] {
            for &eta in &[-2.5, -0.7, 0.0, 0.3, 0.45] {
                let e = response_eval(eta, tau);
                if e.boundary {
                    continue;
                }
                let h = 1e-6;
                let fd_eta = (response_eval(eta + h, tau).prob - response_eval(eta - h, tau).prob)
                    / (2.0 * h);
                let fd_tau = (response_eval(eta, tau + h).prob - response_eval(eta, tau - h).prob)
                    / (2.0 * h);
                assert_abs_diff_eq!(e.d_eta, fd_eta, epsilon = 1e-7);
                assert_abs_diff_eq!(e.d_tau, fd_tau, epsilon = 1e-7);
            }
        }
    }
}
