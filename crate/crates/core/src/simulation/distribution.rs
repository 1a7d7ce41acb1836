//! Catalog of shift-family laws with exact moments and samplers.
//!
//! Every law is sampled in centered form (mean zero) and then shifted to the
//! requested mean, so that the same random stream yields the same centered
//! sample whatever the location is.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adjustment::MomentProfile;
use crate::error::{Error, Result};
use crate::regimes::TailClass;

/// Centered law before location shift and optional negation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Gaussian { sigma: f64 },
    /// Uniform on `[-h, h]`.
    Uniform { half_width: f64 },
    /// `scale · (E - 1)` with `E` standard exponential.
    Exponential { scale: f64 },
    /// `scale · (G - k)` with `G ~ Gamma(k, 1)`.
    Gamma { shape: f64, scale: f64 },
    /// `K - λ` with `K ~ Poisson(λ)`.
    Poisson { lambda: f64 },
    /// `B - p` with `B ~ Bernoulli(p)`.
    Bernoulli { p: f64 },
    /// Symmetric law with density proportional to `exp(-|x|^r)`, rescaled to
    /// unit variance. Used to exercise failing Linnik conditions.
    StretchedExp { power: f64 },
}

impl Law {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Law::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            Law::Uniform { half_width } => half_width > 0.0 && half_width.is_finite(),
            Law::Exponential { scale } => scale > 0.0 && scale.is_finite(),
            Law::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            Law::Poisson { lambda } => lambda > 0.0 && lambda < 1e12,
            Law::Bernoulli { p } => p > 0.0 && p < 1.0,
            Law::StretchedExp { power } => power > 0.0 && power < 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid distribution parameters: {self:?}")))
        }
    }

    /// `(sigma, g1, g2)` of the centered law.
    fn shape_moments(&self) -> (f64, f64, f64) {
        match *self {
            Law::Gaussian { sigma } => (sigma, 0.0, 0.0),
            Law::Uniform { half_width } => (half_width / 3f64.sqrt(), 0.0, -1.2),
            Law::Exponential { scale } => (scale, 2.0, 6.0),
            Law::Gamma { shape, scale } => (scale * shape.sqrt(), 2.0 / shape.sqrt(), 6.0 / shape),
            Law::Poisson { lambda } => (lambda.sqrt(), 1.0 / lambda.sqrt(), 1.0 / lambda),
            Law::Bernoulli { p } => {
                let v = p * (1.0 - p);
                (v.sqrt(), (1.0 - 2.0 * p) / v.sqrt(), (1.0 - 6.0 * v) / v)
            }
            Law::StretchedExp { power } => {
                let r = power;
                let g = |k: f64| libm::tgamma(k / r);
                let (m0, m2, m4) = (g(1.0), g(3.0), g(5.0));
                ((m2 / m0).sqrt() / stretched_scale(r), 0.0, m4 * m0 / (m2 * m2) - 3.0)
            }
        }
    }

    fn tail_class(&self) -> TailClass {
        match *self {
            Law::Gaussian { .. } => TailClass::SubGaussian,
            Law::Uniform { .. } | Law::Bernoulli { .. } => TailClass::Bounded,
            Law::Exponential { .. } | Law::Gamma { .. } | Law::Poisson { .. } => TailClass::ExponentialTail,
            Law::StretchedExp { power } => TailClass::StretchedExp(power),
        }
    }
}

/// Standard deviation of `|x|` drawn from density ∝ `exp(-|x|^r)`; dividing
/// by it gives unit variance.
fn stretched_scale(r: f64) -> f64 {
    (libm::tgamma(3.0 / r) / libm::tgamma(1.0 / r)).sqrt()
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Law::Gaussian { sigma } if sigma == 1.0 => write!(f, "gaussian"),
            Law::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
            Law::Uniform { half_width } if half_width == 3f64.sqrt() => write!(f, "uniform"),
            Law::Uniform { half_width } => write!(f, "uniform({half_width})"),
            Law::Exponential { scale } if scale == 1.0 => write!(f, "exponential"),
            Law::Exponential { scale } => write!(f, "exponential({scale})"),
            Law::Gamma { shape, scale } if scale == 1.0 => write!(f, "gamma({shape})"),
            Law::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
            Law::Poisson { lambda } => write!(f, "poisson({lambda})"),
            Law::Bernoulli { p } => write!(f, "bernoulli({p})"),
            Law::StretchedExp { power } => write!(f, "stretched_exp({power})"),
        }
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let (head, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Usage(format!("distribution `{src}`: missing `)`")))?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        a.parse::<f64>()
                            .map_err(|_| Error::Usage(format!("distribution `{src}`: bad parameter `{a}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                (&s[..i], args)
            }
            None => (s.as_str(), Vec::new()),
        };
        let arity = |max: usize| -> Result<()> {
            if args.len() > max {
                Err(Error::Usage(format!("distribution `{src}`: too many parameters")))
            } else {
                Ok(())
            }
        };
        let law = match head {
            "gaussian" | "normal" => {
                arity(1)?;
                Law::Gaussian { sigma: args.first().copied().unwrap_or(1.0) }
            }
            "uniform" => {
                arity(1)?;
                Law::Uniform { half_width: args.first().copied().unwrap_or(3f64.sqrt()) }
            }
            "exponential" | "shifted_exponential" => {
                arity(1)?;
                Law::Exponential { scale: args.first().copied().unwrap_or(1.0) }
            }
            "gamma" => {
                if args.is_empty() {
                    return Err(Error::Usage(format!("distribution `{src}`: gamma needs a shape, e.g. gamma(4)")));
                }
                arity(2)?;
                Law::Gamma { shape: args[0], scale: args.get(1).copied().unwrap_or(1.0) }
            }
            "poisson" => {
                arity(1)?;
                Law::Poisson { lambda: args.first().copied().unwrap_or(1.0) }
            }
            "bernoulli" => {
                arity(1)?;
                Law::Bernoulli { p: args.first().copied().unwrap_or(0.5) }
            }
            "stretched_exp" => {
                arity(1)?;
                Law::StretchedExp { power: args.first().copied().unwrap_or(0.5) }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown distribution `{other}` (catalog: gaussian, uniform, exponential, gamma(k), \
                     poisson(lambda), bernoulli(p), stretched_exp(r))"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// A catalog law placed at a given mean, optionally mirrored (`-X`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    law: Law,
    mean: f64,
    negated: bool,
}

impl DistributionSpec {
    pub fn new(law: Law, mean: f64) -> Result<Self> {
        law.validate()?;
        if !mean.is_finite() {
            return Err(Error::Usage(format!("distribution mean must be finite, got {mean}")));
        }
        Ok(DistributionSpec { law, mean, negated: false })
    }

    /// Catalog entry by name, centered at zero.
    pub fn parse(name: &str) -> Result<Self> {
        DistributionSpec::new(name.parse()?, 0.0)
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// Catalog name of the underlying law (without mean or mirroring).
    pub fn name(&self) -> String {
        self.law.to_string()
    }

    pub fn with_mean(self, mean: f64) -> Self {
        DistributionSpec { mean, ..self }
    }

    /// Law of `-X`.
    pub fn negated(self) -> Self {
        DistributionSpec { mean: -self.mean, negated: !self.negated, law: self.law }
    }

    pub fn moments(&self) -> MomentProfile {
        let (sigma, g1, g2) = self.law.shape_moments();
        let g1 = if self.negated { -g1 } else { g1 };
        MomentProfile { mu: self.mean, sigma, g1, g2 }
    }

    pub fn tail_class(&self) -> TailClass {
        self.law.tail_class()
    }

    pub fn sampler(&self) -> Sampler {
        let kind = match self.law {
            Law::Gaussian { sigma } => SamplerKind::Gaussian(sigma),
            Law::Uniform { half_width } => SamplerKind::Uniform(half_width),
            Law::Exponential { scale } => SamplerKind::Exponential(scale),
            Law::Gamma { shape, scale } => SamplerKind::Gamma {
                dist: Gamma::new(shape, 1.0).expect("validated shape"),
                shape,
                scale,
            },
            Law::Poisson { lambda } => {
                SamplerKind::Poisson { dist: Poisson::new(lambda).expect("validated rate"), lambda }
            }
            Law::Bernoulli { p } => SamplerKind::Bernoulli(p),
            Law::StretchedExp { power } => SamplerKind::StretchedExp {
                dist: Gamma::new(1.0 / power, 1.0).expect("validated power"),
                inv_power: 1.0 / power,
                inv_scale: 1.0 / stretched_scale(power),
            },
        };
        Sampler { kind, negate: self.negated, mean: self.mean }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{} at mean {}", self.law, self.mean)
        } else {
            write!(f, "{} at mean {}", self.law, self.mean)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRecord {
    name: String,
    mean: f64,
    negated: bool,
}

impl Serialize for DistributionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionRecord { name: self.name(), mean: self.mean, negated: self.negated }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = DistributionRecord::deserialize(deserializer)?;
        let spec = DistributionSpec::parse(&rec.name)
            .map(|d| d.with_mean(rec.mean))
            .map_err(serde::de::Error::custom)?;
        Ok(if rec.negated { spec.with_mean(-rec.mean).negated() } else { spec })
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Gaussian(f64),
    Uniform(f64),
    Exponential(f64),
    Gamma { dist: Gamma<f64>, shape: f64, scale: f64 },
    Poisson { dist: Poisson<f64>, lambda: f64 },
    Bernoulli(f64),
    StretchedExp { dist: Gamma<f64>, inv_power: f64, inv_scale: f64 },
}

/// Prepared sampler for a [`DistributionSpec`].
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
    negate: bool,
    mean: f64,
}

impl Sampler {
    fn centered_unsigned<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Gaussian(sigma) => sigma * rng.sample::<f64, _>(StandardNormal),
            SamplerKind::Uniform(h) => h * (2.0 * rng.random::<f64>() - 1.0),
            SamplerKind::Exponential(scale) => scale * (rng.sample::<f64, _>(Exp1) - 1.0),
            SamplerKind::Gamma { dist, shape, scale } => scale * (dist.sample(rng) - shape),
            SamplerKind::Poisson { dist, lambda } => dist.sample(rng) - lambda,
            SamplerKind::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0 - p
                } else {
                    -p
                }
            }
            SamplerKind::StretchedExp { dist, inv_power, inv_scale } => {
                let mag = dist.sample(rng).powf(*inv_power) * inv_scale;
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }

    /// One draw with mean zero (mirrored if the spec is negated).
    pub fn centered<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let c = self.centered_unsigned(rng);
        if self.negate {
            -c
        } else {
            c
        }
    }

    /// One draw from the law at its mean.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mean + self.centered(rng)
    }

    /// Mean of `n` centered draws. Mirroring negates the sum, which is
    /// bit-identical to summing negated draws.
    pub fn centered_mean<R: Rng + ?Sized>(&self, rng: &mut R, n: u64) -> f64 {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += self.centered_unsigned(rng);
        }
        let mean = sum / n as f64;
        if self.negate {
            -mean
        } else {
            mean
        }
    }
}
