//! Skewness-kurtosis adjusted quantiles and statistics.
//!
//! With `A = g1/6`, `D = (3 g2 - 4 g1²)/72` and `C = (3 g2 - 8 g1²)/72`:
//!
//! * adjusted quantile: `z(1) = z + A z²/√n`, `z(2) = z(1) + D z³/n`
//! * adjusted statistic: `T(1) = T - A T²/√n`, `T(2) = T(1) - C T³/n`
//!
//! `C = D - 2A²` makes `T(s)` an inverse of `z(s)` up to `O(n^{-(s+1)/2})`.

use std::fmt;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, Probability};

/// Known moment data of the shift family: mean, standard deviation,
/// skewness and excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub mu: f64,
    pub sigma: f64,
    pub g1: f64,
    pub g2: f64,
}

impl MomentProfile {
    pub fn new(mu: f64, sigma: f64, g1: f64, g2: f64) -> Result<Self> {
        let m = MomentProfile { mu, sigma, g1, g2 };
        m.validate()?;
        Ok(m)
    }

    /// Standardized profile `(0, 1, g1, g2)`.
    pub fn standardized(g1: f64, g2: f64) -> Result<Self> {
        MomentProfile::new(0.0, 1.0, g1, g2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.sigma.is_finite() && self.g1.is_finite() && self.g2.is_finite()) {
            return Err(Error::Model(format!("moment profile must be finite: {self:?}")));
        }
        if self.sigma <= 0.0 {
            return Err(Error::Model(format!("sigma must be positive, got {}", self.sigma)));
        }
        // Pearson's inequality; the slack absorbs rounding at two-point laws.
        let floor = self.g1 * self.g1 - 2.0;
        if self.g2 < floor - 1e-12 * floor.abs().max(1.0) {
            return Err(Error::Model(format!(
                "infeasible moments: kurtosis g2 = {} below g1^2 - 2 = {floor}",
                self.g2
            )));
        }
        Ok(())
    }

    /// Moments of `-X`: mean and skewness change sign.
    pub fn negated(&self) -> Self {
        MomentProfile { mu: -self.mu, g1: -self.g1, ..*self }
    }

    pub fn cramer_coefficients(&self) -> CramerCoefficients {
        CramerCoefficients::from_moments(self.g1, self.g2)
    }
}

/// Adjustment order `s`: 0 is the unadjusted Gaussian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum AdjustmentOrder {
    Unadjusted,
    First,
    Second,
}

impl AdjustmentOrder {
    pub const ALL: [AdjustmentOrder; 3] =
        [AdjustmentOrder::Unadjusted, AdjustmentOrder::First, AdjustmentOrder::Second];

    pub fn index(self) -> u8 {
        match self {
            AdjustmentOrder::Unadjusted => 0,
            AdjustmentOrder::First => 1,
            AdjustmentOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for AdjustmentOrder {
    type Error = Error;

    fn try_from(s: u8) -> Result<Self> {
        match s {
            0 => Ok(AdjustmentOrder::Unadjusted),
            1 => Ok(AdjustmentOrder::First),
            2 => Ok(AdjustmentOrder::Second),
            other => Err(Error::Usage(format!("adjustment order must be 0, 1 or 2, got {other}"))),
        }
    }
}

impl From<AdjustmentOrder> for u8 {
    fn from(s: AdjustmentOrder) -> u8 {
        s.index()
    }
}

impl fmt::Display for AdjustmentOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Which tail a quantile adjustment refers to. `Minus` uses the skewness of
/// `-X` (lower intervals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn apply(self, g1: f64) -> f64 {
        match self {
            Sign::Plus => g1,
            Sign::Minus => -g1,
        }
    }
}

/// Coefficients of the Cramér series in the large-deviation tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CramerCoefficients {
    pub a0: f64,
    pub a1: f64,
}

impl CramerCoefficients {
    pub fn from_moments(g1: f64, g2: f64) -> Self {
        CramerCoefficients { a0: g1 / 6.0, a1: (g2 - 3.0 * g1 * g1) / 24.0 }
    }
}

fn constant<T: FromPrimitive>(v: u8) -> T {
    T::from_u8(v).expect("small integer constants are representable")
}

/// `A = g1 / 6`.
pub fn skew_coefficient<T: Num + FromPrimitive + Copy>(g1: T) -> T {
    g1 / constant(6)
}

/// `D = (3 g2 - 4 g1²) / 72`, the cubic term of the second kind quantile.
pub fn quantile_cubic_coefficient<T: Num + FromPrimitive + Copy>(g1: T, g2: T) -> T {
    (constant::<T>(3) * g2 - constant::<T>(4) * g1 * g1) / constant(72)
}

/// `C = (3 g2 - 8 g1²) / 72`, the cubic term of the second kind statistic.
pub fn statistic_cubic_coefficient<T: Num + FromPrimitive + Copy>(g1: T, g2: T) -> T {
    (constant::<T>(3) * g2 - constant::<T>(8) * g1 * g1) / constant(72)
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        Err(Error::Domain("sample size n must be at least 1".into()))
    } else {
        Ok(n as f64)
    }
}

/// Applies the order-`s` adjustment to an already computed Gaussian quantile.
pub fn adjust_quantile_value(z: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder, sign: Sign) -> f64 {
    let nf = n as f64;
    let g1 = sign.apply(m.g1);
    let mut out = z;
    if s >= AdjustmentOrder::First {
        out += skew_coefficient(g1) / nf.sqrt() * z * z;
    }
    if s >= AdjustmentOrder::Second {
        out += quantile_cubic_coefficient(g1, m.g2) / nf * z * z * z;
    }
    out
}

/// Adjusted upper quantile `z_{1-p}(s)` (or `z⁻_{1-p}(s)` for `Sign::Minus`).
pub fn adjusted_quantile(
    p_tail: Probability,
    n: u64,
    m: &MomentProfile,
    s: AdjustmentOrder,
    sign: Sign,
) -> Result<f64> {
    check_n(n)?;
    let z = gaussian::upper_quantile(p_tail);
    Ok(adjust_quantile_value(z, n, m, s, sign))
}

/// Open interval `(lo, hi)` of statistic values on which the adjusted
/// statistic is strictly increasing. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneDomain {
    pub lo: f64,
    pub hi: f64,
}

impl MonotoneDomain {
    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// Monotone branch of `T ↦ T(s)` containing zero.
///
/// For `s >= 1` this is `g1·t < 3√n`. For `s = 2` it is further restricted
/// to the interval around zero where `1 - 2A t/√n - 3C t²/n > 0`.
pub fn monotone_domain(n: u64, m: &MomentProfile, s: AdjustmentOrder) -> MonotoneDomain {
    let mut dom = MonotoneDomain { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    if s == AdjustmentOrder::Unadjusted {
        return dom;
    }
    let root_n = (n as f64).sqrt();
    if m.g1 > 0.0 {
        dom.hi = 3.0 * root_n / m.g1;
    } else if m.g1 < 0.0 {
        dom.lo = 3.0 * root_n / m.g1;
    }
    if s == AdjustmentOrder::Second {
        let a = skew_coefficient(m.g1);
        let c = statistic_cubic_coefficient(m.g1, m.g2);
        // Roots in u = t/√n of 3C u² + 2A u - 1 = 0.
        let roots: Vec<f64> = if c == 0.0 {
            if a != 0.0 { vec![0.5 / a] } else { vec![] }
        } else {
            let disc = 4.0 * a * a + 12.0 * c;
            if disc < 0.0 {
                vec![]
            } else {
                // Stable quadratic roots; q != 0 because disc > 0 whenever a == 0 here.
                let beta = 2.0 * a;
                let sign = if beta < 0.0 { -1.0 } else { 1.0 };
                let q = -0.5 * (beta + sign * disc.sqrt());
                vec![q / (3.0 * c), -1.0 / q]
            }
        };
        for u in roots {
            let t = u * root_n;
            if t > 0.0 {
                dom.hi = dom.hi.min(t);
            } else if t < 0.0 {
                dom.lo = dom.lo.max(t);
            }
        }
    }
    dom
}

/// Adjusted statistic without the domain check.
#[inline]
pub(crate) fn adjusted_statistic_value(t: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder) -> f64 {
    let nf = n as f64;
    let mut out = t;
    if s >= AdjustmentOrder::First {
        out -= skew_coefficient(m.g1) / nf.sqrt() * t * t;
    }
    if s >= AdjustmentOrder::Second {
        out -= statistic_cubic_coefficient(m.g1, m.g2) / nf * t * t * t;
    }
    out
}

fn adjusted_statistic_derivative(t: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder) -> f64 {
    let nf = n as f64;
    let mut out = 1.0;
    if s >= AdjustmentOrder::First {
        out -= 2.0 * skew_coefficient(m.g1) / nf.sqrt() * t;
    }
    if s >= AdjustmentOrder::Second {
        out -= 3.0 * statistic_cubic_coefficient(m.g1, m.g2) / nf * t * t;
    }
    out
}

/// Adjusted statistic `T(s)`. Rejects `t` outside the monotone branch.
pub fn adjusted_statistic(t: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder) -> Result<f64> {
    check_n(n)?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("statistic must be finite, got {t}")));
    }
    let dom = monotone_domain(n, m, s);
    if !dom.contains(t) {
        return Err(Error::Domain(format!(
            "statistic t = {t} lies outside the monotone domain ({}, {}) of the order-{s} adjusted \
             statistic (skewness bound 3*sqrt(n)/g1 = {})",
            dom.lo,
            dom.hi,
            3.0 * (n as f64).sqrt() / m.g1
        )));
    }
    Ok(adjusted_statistic_value(t, n, m, s))
}

/// Inverse of [`adjusted_statistic`] on its monotone branch, by safeguarded
/// Newton iteration inside a sign-change bracket.
pub fn inverse_adjusted_statistic(x: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder) -> Result<f64> {
    check_n(n)?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("value must be finite, got {x}")));
    }
    if s == AdjustmentOrder::Unadjusted {
        return Ok(x);
    }
    let dom = monotone_domain(n, m, s);
    let f = |t: f64| adjusted_statistic_value(t, n, m, s) - x;
    let out_of_image = || {
        Error::Domain(format!(
            "x = {x} is outside the image of the monotone branch ({}, {}) of the order-{s} adjusted statistic",
            dom.lo, dom.hi
        ))
    };

    let mut hi = if dom.hi.is_finite() {
        if f(dom.hi) <= 0.0 {
            return Err(out_of_image());
        }
        dom.hi
    } else {
        let mut b = x.abs().max(1.0);
        while f(b) <= 0.0 {
            b *= 2.0;
            if !b.is_finite() {
                return Err(out_of_image());
            }
        }
        b
    };
    let mut lo = if dom.lo.is_finite() {
        if f(dom.lo) >= 0.0 {
            return Err(out_of_image());
        }
        dom.lo
    } else {
        let mut a = -x.abs().max(1.0);
        while f(a) >= 0.0 {
            a *= 2.0;
            if !a.is_finite() {
                return Err(out_of_image());
            }
        }
        a
    };

    let tol = 1e-12_f64.max(4.0 * f64::EPSILON * x.abs());
    let mut t = x.clamp(lo, hi);
    if !(t > lo && t < hi) {
        t = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let r = f(t);
        if r.abs() <= tol {
            return Ok(t);
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = adjusted_statistic_derivative(t, n, m, s);
        let newton = t - r / d;
        t = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * t.abs() {
            break;
        }
    }
    Ok(t)
}

/// Logarithm of the Cramér tail comparator
/// `f(x) = e^{-x²/2 + (x³/√n) Σ_{k<s} a_k (x/√n)^k} / (√(2π) x)`.
pub fn ln_cramer_tail(x: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder, sign: Sign) -> Result<f64> {
    let nf = check_n(n)?;
    if s == AdjustmentOrder::Unadjusted {
        return Err(Error::Domain("the Cramér tail comparator is defined for orders 1 and 2".into()));
    }
    let base = gaussian::ln_mills_tail(x)?;
    let coef = CramerCoefficients::from_moments(sign.apply(m.g1), m.g2);
    let ratio = x / nf.sqrt();
    let mut series = coef.a0;
    if s == AdjustmentOrder::Second {
        series += coef.a1 * ratio;
    }
    Ok(base + x * x * ratio * series)
}

/// Cramér tail comparator `f_{n,s}(x)` for `X` (`Sign::Plus`) or `-X`.
pub fn cramer_tail(x: f64, n: u64, m: &MomentProfile, s: AdjustmentOrder, sign: Sign) -> Result<f64> {
    ln_cramer_tail(x, n, m, s, sign).map(f64::exp)
}
