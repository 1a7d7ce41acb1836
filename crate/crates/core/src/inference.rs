//! Adjusted confidence intervals, modified local alternatives and one-sided
//! Gauss-test decisions for the mean.
//!
//! Coverage and test decisions are evaluated on the standardized distance
//! `√n (x̄ - μ)/σ` computed by [`standardized`], so that "reject H₀" and
//! "the upper interval misses μ₀" are the same floating-point event.

use serde::{Deserialize, Serialize};

use crate::adjustment::{self, AdjustmentOrder, MomentProfile, Sign};
use crate::error::{Error, Result};
use crate::gaussian::{self, Probability};

/// `√n (x̄ - μ) / σ`.
#[inline]
pub fn standardized(xbar: f64, mu: f64, sigma: f64, n: u64) -> f64 {
    (xbar - mu) * (n as f64).sqrt() / sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Upper,
    Lower,
    #[serde(alias = "two-sided")]
    TwoSided,
}

/// Confidence interval for the mean together with its construction data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub kind: IntervalKind,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub order: AdjustmentOrder,
    /// `(α₁, α₂)`; `α₂` only for two-sided intervals.
    pub levels: (f64, Option<f64>),
    pub xbar: f64,
    pub sigma: f64,
    pub n: u64,
    /// Adjusted quantile on the left (upper/two-sided kinds).
    pub left_quantile: Option<f64>,
    /// Adjusted quantile `z⁻` on the right (lower/two-sided kinds).
    pub right_quantile: Option<f64>,
}

impl ConfidenceInterval {
    /// Upper and two-sided intervals are closed at `L`; the lower interval is
    /// open at `R` and the two-sided one closed at `R`.
    pub fn covers(&self, mu: f64) -> bool {
        let t = standardized(self.xbar, mu, self.sigma, self.n);
        match self.kind {
            IntervalKind::Upper => t <= self.left_quantile.expect("upper interval has a left quantile"),
            IntervalKind::Lower => -t < self.right_quantile.expect("lower interval has a right quantile"),
            IntervalKind::TwoSided => {
                t <= self.left_quantile.expect("two-sided interval has a left quantile")
                    && -t <= self.right_quantile.expect("two-sided interval has a right quantile")
            }
        }
    }

    pub fn width(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

fn half_width(sigma: f64, n: u64, z: f64) -> f64 {
    sigma / (n as f64).sqrt() * z
}

fn check_xbar(xbar: f64) -> Result<()> {
    if xbar.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sample mean must be finite, got {xbar}")))
    }
}

/// `[x̄ - σ z_{1-α}(s)/√n, ∞)`.
pub fn upper_interval(
    xbar: f64,
    n: u64,
    m: &MomentProfile,
    alpha: Probability,
    s: AdjustmentOrder,
) -> Result<ConfidenceInterval> {
    check_xbar(xbar)?;
    let z = adjustment::adjusted_quantile(alpha, n, m, s, Sign::Plus)?;
    Ok(ConfidenceInterval {
        kind: IntervalKind::Upper,
        lower_bound: xbar - half_width(m.sigma, n, z),
        upper_bound: f64::INFINITY,
        order: s,
        levels: (alpha.value(), None),
        xbar,
        sigma: m.sigma,
        n,
        left_quantile: Some(z),
        right_quantile: None,
    })
}

/// `(-∞, x̄ + σ z⁻_{1-α}(s)/√n)`.
pub fn lower_interval(
    xbar: f64,
    n: u64,
    m: &MomentProfile,
    alpha: Probability,
    s: AdjustmentOrder,
) -> Result<ConfidenceInterval> {
    check_xbar(xbar)?;
    let z = adjustment::adjusted_quantile(alpha, n, m, s, Sign::Minus)?;
    Ok(ConfidenceInterval {
        kind: IntervalKind::Lower,
        lower_bound: f64::NEG_INFINITY,
        upper_bound: xbar + half_width(m.sigma, n, z),
        order: s,
        levels: (alpha.value(), None),
        xbar,
        sigma: m.sigma,
        n,
        left_quantile: None,
        right_quantile: Some(z),
    })
}

/// `[L(s; α₁), R(s; α₂)]`, requiring `α₁ + α₂ < 1`.
pub fn two_sided_interval(
    xbar: f64,
    n: u64,
    m: &MomentProfile,
    alpha1: Probability,
    alpha2: Probability,
    s: AdjustmentOrder,
) -> Result<ConfidenceInterval> {
    if alpha1.value() + alpha2.value() >= 1.0 {
        return Err(Error::Usage(format!(
            "two-sided levels must satisfy alpha1 + alpha2 < 1, got {} + {}",
            alpha1.value(),
            alpha2.value()
        )));
    }
    let up = upper_interval(xbar, n, m, alpha1, s)?;
    let low = lower_interval(xbar, n, m, alpha2, s)?;
    Ok(ConfidenceInterval {
        kind: IntervalKind::TwoSided,
        lower_bound: up.lower_bound,
        upper_bound: low.upper_bound,
        order: s,
        levels: (alpha1.value(), Some(alpha2.value())),
        xbar,
        sigma: m.sigma,
        n,
        left_quantile: up.left_quantile,
        right_quantile: low.right_quantile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// Modified local non-true parameter `μ_{1,n}(s)` or `μ⁻_{1,n}(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalAlternative {
    pub value: f64,
    pub side: Side,
    pub order: AdjustmentOrder,
    pub levels: (f64, f64),
}

/// Distance of the upper-side alternative from `μ`, with skewness `g1`.
fn alternative_offset(z_alpha: f64, z_beta: f64, n: u64, sigma: f64, g1: f64, g2: f64, s: AdjustmentOrder) -> f64 {
    let nf = n as f64;
    let mut out = sigma / nf.sqrt() * (z_alpha - z_beta);
    if s >= AdjustmentOrder::First {
        out += sigma * adjustment::skew_coefficient(g1) / nf * (z_alpha * z_alpha - z_beta * z_beta);
    }
    if s >= AdjustmentOrder::Second {
        out += sigma * adjustment::quantile_cubic_coefficient(g1, g2) / (nf * nf.sqrt())
            * (z_alpha.powi(3) - z_beta.powi(3));
    }
    out
}

/// `μ_{1,n}(s; α, β)` (upper) or `μ⁻_{1,n}(s; α, β)` (lower) around `mu`.
///
/// The lower value is the negated upper value of the mirrored law `-X`, so
/// the two are exact mirror images in floating point.
pub fn local_alternative(
    mu: f64,
    n: u64,
    m: &MomentProfile,
    alpha: Probability,
    beta: Probability,
    s: AdjustmentOrder,
    side: Side,
) -> Result<LocalAlternative> {
    if n == 0 {
        return Err(Error::Domain("sample size n must be at least 1".into()));
    }
    if !mu.is_finite() {
        return Err(Error::Domain(format!("mean must be finite, got {mu}")));
    }
    let z_alpha = gaussian::upper_quantile(alpha);
    let z_beta = gaussian::normal_quantile(beta);
    let value = match side {
        Side::Upper => mu + alternative_offset(z_alpha, z_beta, n, m.sigma, m.g1, m.g2, s),
        Side::Lower => mu - alternative_offset(z_alpha, z_beta, n, m.sigma, -m.g1, m.g2, s),
    };
    Ok(LocalAlternative { value, side, order: s, levels: (alpha.value(), beta.value()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestRule {
    /// `T_{n,0} > z_{1-α}(s)`
    AdjustedQuantile,
    /// `T^{(s)}_{n,0} > z_{1-α}`
    AdjustedStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub reject: bool,
    pub statistic_value: f64,
    pub threshold: f64,
    pub rule: TestRule,
    pub order: AdjustmentOrder,
}

/// One-sided test of `H₀: μ ≤ μ₀` against `μ > μ₀` with its threshold
/// prepared once, for repeated decisions at fixed `(n, m, μ₀, α, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTest {
    n: u64,
    m: MomentProfile,
    mu0: f64,
    order: AdjustmentOrder,
    rule: TestRule,
    threshold: f64,
    domain: adjustment::MonotoneDomain,
}

impl GaussTest {
    pub fn new(
        n: u64,
        m: &MomentProfile,
        mu0: f64,
        alpha: Probability,
        s: AdjustmentOrder,
        rule: TestRule,
    ) -> Result<Self> {
        m.validate()?;
        if !mu0.is_finite() {
            return Err(Error::Domain(format!("null mean must be finite, got {mu0}")));
        }
        let threshold = match rule {
            TestRule::AdjustedQuantile => adjustment::adjusted_quantile(alpha, n, m, s, Sign::Plus)?,
            TestRule::AdjustedStatistic => {
                if n == 0 {
                    return Err(Error::Domain("sample size n must be at least 1".into()));
                }
                gaussian::upper_quantile(alpha)
            }
        };
        let domain = adjustment::monotone_domain(n, m, s);
        Ok(GaussTest { n, m: *m, mu0, order: s, rule, threshold, domain })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Decision for one sample mean. Ties do not reject.
    pub fn decide(&self, xbar: f64) -> Result<TestDecision> {
        check_xbar(xbar)?;
        let t = standardized(xbar, self.mu0, self.m.sigma, self.n);
        let statistic_value = match self.rule {
            TestRule::AdjustedQuantile => t,
            TestRule::AdjustedStatistic => {
                adjustment::adjusted_statistic(t, self.n, &self.m, self.order).map_err(|e| match e {
                    Error::Domain(msg) => Error::Domain(format!("adjusted-statistic test rule: {msg}")),
                    other => other,
                })?
            }
        };
        Ok(TestDecision {
            reject: statistic_value > self.threshold,
            statistic_value,
            threshold: self.threshold,
            rule: self.rule,
            order: self.order,
        })
    }

    /// Like [`GaussTest::decide`] but total: for the adjusted-statistic rule a
    /// standardized mean beyond the upper end of the monotone branch rejects
    /// and one below the lower end does not, following the sign of the
    /// branch at its endpoints.
    pub fn rejects(&self, xbar: f64) -> bool {
        let t = standardized(xbar, self.mu0, self.m.sigma, self.n);
        match self.rule {
            TestRule::AdjustedQuantile => t > self.threshold,
            TestRule::AdjustedStatistic => {
                if t >= self.domain.hi {
                    true
                } else if t <= self.domain.lo {
                    false
                } else {
                    adjustment::adjusted_statistic_value(t, self.n, &self.m, self.order) > self.threshold
                }
            }
        }
    }
}

/// One-sided test of `H₀: μ ≤ μ₀` against `μ > μ₀`. Ties do not reject.
pub fn gauss_test(
    xbar: f64,
    n: u64,
    m: &MomentProfile,
    mu0: f64,
    alpha: Probability,
    s: AdjustmentOrder,
    rule: TestRule,
) -> Result<TestDecision> {
    GaussTest::new(n, m, mu0, alpha, s, rule)?.decide(xbar)
}
