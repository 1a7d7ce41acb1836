//! One-parameter exponential families `dP_θ/dν(x) = exp(θx - B(θ))`.
//!
//! Moments come from the derivatives of the cumulant function `B`, supplied
//! analytically for each catalog entry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjustment::MomentProfile;
use crate::error::{Error, Result};
use crate::gaussian::{self, Probability};
use crate::simulation::distribution::{DistributionSpec, Law};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Unit-variance normal, `B(θ) = θ²/2`.
    Gaussian,
    /// `B(θ) = e^θ`.
    Poisson,
    /// `B(θ) = ln(1 + e^θ)`.
    Bernoulli,
    /// Gamma with shape `k` and rate `-θ`, `B(θ) = -k ln(-θ)`, `θ < 0`.
    Gamma { shape: f64 },
}

/// Catalog exponential family addressed by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSpec {
    family: Family,
}

fn logistic(theta: f64) -> f64 {
    if theta >= 0.0 {
        1.0 / (1.0 + (-theta).exp())
    } else {
        let e = theta.exp();
        e / (1.0 + e)
    }
}

impl CumulantSpec {
    pub fn new(family: Family) -> Result<Self> {
        if let Family::Gamma { shape } = family {
            if !(shape > 0.0 && shape.is_finite()) {
                return Err(Error::Usage(format!("gamma family needs a positive shape, got {shape}")));
            }
        }
        Ok(CumulantSpec { family })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Open interval of natural parameters.
    pub fn theta_domain(&self) -> (f64, f64) {
        match self.family {
            Family::Gamma { .. } => (f64::NEG_INFINITY, 0.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.theta_domain();
        if theta.is_finite() && theta > lo && theta < hi {
            Ok(())
        } else {
            Err(Error::Domain(format!("theta = {theta} is outside the natural parameter domain ({lo}, {hi}) of {self}")))
        }
    }

    /// Cumulant function `B(θ)`.
    pub fn cumulant(&self, theta: f64) -> f64 {
        match self.family {
            Family::Gaussian => 0.5 * theta * theta,
            Family::Poisson => theta.exp(),
            Family::Bernoulli => {
                if theta > 0.0 {
                    theta + (-theta).exp().ln_1p()
                } else {
                    theta.exp().ln_1p()
                }
            }
            Family::Gamma { shape } => -shape * (-theta).ln(),
        }
    }

    /// `k`-th derivative of `B` for `k` in `1..=4`.
    pub fn derivative(&self, k: u8, theta: f64) -> f64 {
        assert!((1..=4).contains(&k), "derivative order must be 1..=4");
        match self.family {
            Family::Gaussian => match k {
                1 => theta,
                2 => 1.0,
                _ => 0.0,
            },
            Family::Poisson => theta.exp(),
            Family::Bernoulli => {
                let p = logistic(theta);
                let q = logistic(-theta);
                match k {
                    1 => p,
                    2 => p * q,
                    3 => p * q * (q - p),
                    _ => p * q * (1.0 - 6.0 * p * q),
                }
            }
            Family::Gamma { shape } => {
                let r = -theta;
                match k {
                    1 => shape / r,
                    2 => shape / (r * r),
                    3 => 2.0 * shape / (r * r * r),
                    _ => 6.0 * shape / (r * r * r * r),
                }
            }
        }
    }
}

impl fmt::Display for CumulantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Gaussian => write!(f, "gaussian"),
            Family::Poisson => write!(f, "poisson"),
            Family::Bernoulli => write!(f, "bernoulli"),
            Family::Gamma { shape } => write!(f, "gamma({shape})"),
        }
    }
}

impl FromStr for CumulantSpec {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let family = match s.as_str() {
            "gaussian" | "normal" => Family::Gaussian,
            "poisson" => Family::Poisson,
            "bernoulli" => Family::Bernoulli,
            _ => {
                let shape = s
                    .strip_prefix("gamma(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|k| k.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Usage(format!(
                            "unknown exponential family `{src}` (catalog: gaussian, poisson, bernoulli, gamma(k))"
                        ))
                    })?;
                Family::Gamma { shape }
            }
        };
        CumulantSpec::new(family)
    }
}

impl Serialize for CumulantSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CumulantSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `μ = B'`, `σ = √B''`, `g1 = B'''/B''^{3/2}`, `g2 = B''''/B''²`.
pub fn moments_from_cumulant(spec: &CumulantSpec, theta: f64) -> Result<MomentProfile> {
    spec.check_theta(theta)?;
    let b2 = spec.derivative(2, theta);
    if !(b2 > 0.0 && b2.is_finite()) {
        return Err(Error::Model(format!("{spec} at theta = {theta}: variance B''(theta) = {b2} is not positive")));
    }
    let m = MomentProfile {
        mu: spec.derivative(1, theta),
        sigma: b2.sqrt(),
        g1: spec.derivative(3, theta) / b2.powf(1.5),
        g2: spec.derivative(4, theta) / (b2 * b2),
    };
    m.validate().map_err(|e| Error::Model(format!("{spec} at theta = {theta}: {e}")))?;
    Ok(m)
}

/// Threshold `z_{1-α} + B'''(θ₀)/(6√n B''(θ₀)^{3/2}) z²_{1-α}` for the test
/// of `H₀: θ ≤ θ₀`, applied to the standardized mean at `θ₀`.
pub fn proposition_threshold(spec: &CumulantSpec, theta0: f64, n: u64, alpha: Probability) -> Result<f64> {
    spec.check_theta(theta0)?;
    if n == 0 {
        return Err(Error::Domain("sample size n must be at least 1".into()));
    }
    let b2 = spec.derivative(2, theta0);
    if !(b2 > 0.0 && b2.is_finite()) {
        return Err(Error::Model(format!("{spec} at theta = {theta0}: variance B''(theta) = {b2} is not positive")));
    }
    let z = gaussian::upper_quantile(alpha);
    let g1 = spec.derivative(3, theta0) / b2.powf(1.5);
    Ok(z + g1 / 6.0 / (n as f64).sqrt() * z * z)
}

/// Law of `X(θ) - B'(θ) + target_mu`.
pub fn shifted_sample_law(spec: &CumulantSpec, theta: f64, target_mu: f64) -> Result<DistributionSpec> {
    spec.check_theta(theta)?;
    let law = match spec.family {
        Family::Gaussian => Law::Gaussian { sigma: 1.0 },
        Family::Poisson => Law::Poisson { lambda: theta.exp() },
        Family::Bernoulli => Law::Bernoulli { p: logistic(theta) },
        Family::Gamma { shape } => Law::Gamma { shape, scale: 1.0 / (-theta) },
    };
    DistributionSpec::new(law, target_mu)
        .map_err(|e| Error::Usage(format!("no sampler available for {spec} at theta = {theta}: {e}")))
}
