//! Admissibility diagnostics: error schedules `α(n)`, `β(n)`, the
//! Osipov-type lower-bound condition, the order `s` implied by `γ`, and the
//! Linnik exponential-moment condition for catalog distributions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjustment::AdjustmentOrder;
use crate::error::{Error, Result};
use crate::gaussian::Probability;
use crate::simulation::distribution::DistributionSpec;

/// Number of trailing consecutive increases the Osipov verdict requires.
pub const OSIPOV_TAIL_STEPS: usize = 3;

/// Closed-form error-probability sequence in `n`.
///
/// Grammar: `c`, `c*n^-p`, `c/log(n)`, `boundary(gamma)`. The boundary
/// sequence is `n^{-γ} exp(-n^{2γ}/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleExpr {
    Constant(f64),
    Power { c: f64, p: f64 },
    InverseLog(f64),
    Boundary(f64),
}

impl ScheduleExpr {
    /// `ln α(n)`, finite for every `n` where the schedule is defined.
    pub fn ln_at(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            ScheduleExpr::Constant(c) => c.ln(),
            ScheduleExpr::Power { c, p } => c.ln() - p * nf.ln(),
            ScheduleExpr::InverseLog(c) => c.ln() - nf.ln().ln(),
            ScheduleExpr::Boundary(g) => -g * nf.ln() - 0.5 * nf.powf(2.0 * g),
        }
    }

    /// `α(n)` as a probability. Fails if the value leaves `(0, 1)`.
    pub fn at(&self, n: u64) -> Result<Probability> {
        if let ScheduleExpr::Constant(c) = *self {
            return Probability::new(c);
        }
        let ln = self.ln_at(n);
        if !(ln < 0.0) || !ln.is_finite() {
            return Err(Error::Domain(format!(
                "schedule {self} evaluates outside (0, 1) at n = {n} (ln value {ln})"
            )));
        }
        Probability::new(ln.exp()).map_err(|_| {
            Error::Domain(format!("schedule {self} underflows at n = {n} (ln value {ln})"))
        })
    }
}

impl fmt::Display for ScheduleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScheduleExpr::Constant(c) => write!(f, "{c}"),
            ScheduleExpr::Power { c, p } => write!(f, "{c}*n^-{p}"),
            ScheduleExpr::InverseLog(c) => write!(f, "{c}/log(n)"),
            ScheduleExpr::Boundary(g) => write!(f, "boundary({g})"),
        }
    }
}

fn parse_positive(s: &str, what: &str, src: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("schedule `{src}`: cannot parse {what} `{s}`")))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Usage(format!("schedule `{src}`: {what} must be positive, got {v}")))
    }
}

impl FromStr for ScheduleExpr {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(inner) = s.strip_prefix("boundary(").and_then(|r| r.strip_suffix(')')) {
            return Ok(ScheduleExpr::Boundary(parse_positive(inner, "gamma", src)?));
        }
        if let Some(c) = s.strip_suffix("/log(n)") {
            return Ok(ScheduleExpr::InverseLog(parse_positive(c, "constant", src)?));
        }
        if let Some(idx) = s.find("n^-") {
            let (head, tail) = s.split_at(idx);
            let p = parse_positive(&tail[3..], "exponent", src)?;
            let c = match head {
                "" => 1.0,
                h => parse_positive(h.strip_suffix('*').unwrap_or(h), "constant", src)?,
            };
            return Ok(ScheduleExpr::Power { c, p });
        }
        let c = parse_positive(&s, "constant", src)?;
        if c >= 1.0 {
            return Err(Error::Usage(format!("schedule `{src}`: constant level must be below 1")));
        }
        Ok(ScheduleExpr::Constant(c))
    }
}

impl Serialize for ScheduleExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScheduleExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => ScheduleExpr::from_str(&v.to_string()),
            Raw::Text(s) => ScheduleExpr::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Pair of error sequences `(α(n), β(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSchedule {
    pub alpha: ScheduleExpr,
    pub beta: ScheduleExpr,
}

impl ErrorSchedule {
    pub fn new(alpha: ScheduleExpr, beta: ScheduleExpr) -> Self {
        ErrorSchedule { alpha, beta }
    }

    /// Same sequence for both error kinds.
    pub fn symmetric(expr: ScheduleExpr) -> Self {
        ErrorSchedule { alpha: expr, beta: expr }
    }

    pub fn description(&self) -> String {
        format!("alpha(n) = {}; beta(n) = {}", self.alpha, self.beta)
    }

    pub fn alpha_at(&self, n: u64) -> Result<Probability> {
        self.alpha.at(n)
    }

    pub fn beta_at(&self, n: u64) -> Result<Probability> {
        self.beta.at(n)
    }
}

/// Osipov order `γ ∈ (1/6, 3/10]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct OsipovOrder(f64);

impl OsipovOrder {
    pub fn new(gamma: f64) -> Result<Self> {
        order_for_gamma(gamma).map(|_| OsipovOrder(gamma))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn order(self) -> AdjustmentOrder {
        order_for_gamma(self.0).expect("validated on construction")
    }
}

impl TryFrom<f64> for OsipovOrder {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        OsipovOrder::new(v)
    }
}

impl From<OsipovOrder> for f64 {
    fn from(g: OsipovOrder) -> f64 {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub n: u64,
    /// `ln( n^γ exp(n^{2γ}/2) min(α(n), β(n)) )`
    pub log_criterion: f64,
}

/// Finite-grid evidence for the Osipov-type condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    /// The last [`OSIPOV_TAIL_STEPS`] consecutive criterion ratios exceed one.
    pub holds: bool,
    pub witness: Vec<WitnessRow>,
    /// Every consecutive ratio over the whole grid exceeds one.
    pub monotone_tail: bool,
}

fn strictly_increases(prev: f64, next: f64) -> bool {
    next - prev > 1e-9 * prev.abs().max(next.abs()).max(1.0)
}

/// Evaluates `n^γ exp(n^{2γ}/2) min(α(n), β(n))` on `grid` in log space and
/// reports whether it is increasing over the tail of the grid.
pub fn osipov_diagnostic(sched: &ErrorSchedule, gamma: OsipovOrder, grid: &[u64]) -> Result<RegimeVerdict> {
    if grid.len() < OSIPOV_TAIL_STEPS + 1 {
        return Err(Error::Usage(format!(
            "Osipov diagnostic needs a grid of at least {} sample sizes, got {}",
            OSIPOV_TAIL_STEPS + 1,
            grid.len()
        )));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("Osipov grid must be strictly increasing positive integers".into()));
    }
    let g = gamma.value();
    let witness = grid
        .iter()
        .map(|&n| {
            sched.alpha.at(n)?;
            sched.beta.at(n)?;
            let nf = n as f64;
            let ln_min = sched.alpha.ln_at(n).min(sched.beta.ln_at(n));
            Ok(WitnessRow { n, log_criterion: g * nf.ln() + 0.5 * nf.powf(2.0 * g) + ln_min })
        })
        .collect::<Result<Vec<_>>>()?;
    let increases: Vec<bool> =
        witness.windows(2).map(|w| strictly_increases(w[0].log_criterion, w[1].log_criterion)).collect();
    let holds = increases[increases.len() - OSIPOV_TAIL_STEPS..].iter().all(|&b| b);
    let monotone_tail = increases.iter().all(|&b| b);
    Ok(RegimeVerdict { holds, witness, monotone_tail })
}

/// `s = 1` for `γ ∈ (1/6, 1/4]`, `s = 2` for `γ ∈ (1/4, 3/10]`.
pub fn order_for_gamma(gamma: f64) -> Result<AdjustmentOrder> {
    if gamma > 1.0 / 6.0 && gamma <= 0.25 {
        Ok(AdjustmentOrder::First)
    } else if gamma > 0.25 && gamma <= 0.3 {
        Ok(AdjustmentOrder::Second)
    } else {
        Err(Error::Regime(format!(
            "gamma = {gamma} is outside the admissible range (1/6, 3/10] (first kind: (1/6, 1/4], second kind: (1/4, 3/10])"
        )))
    }
}

/// Exponent `4γ/(2γ+1)` of the Linnik moment `E exp(|X - μ|^r)`.
pub fn linnik_exponent(gamma: f64) -> Result<f64> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(4.0 * gamma / (2.0 * gamma + 1.0))
    } else {
        Err(Error::Domain(format!("Linnik order gamma must be positive, got {gamma}")))
    }
}

/// Tail behaviour of a catalog distribution, used for the Linnik condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class", content = "power")]
pub enum TailClass {
    SubGaussian,
    Bounded,
    /// Tails of order `exp(-c|x|)` or lighter, but not sub-Gaussian.
    ExponentialTail,
    /// Tails of order `exp(-|x|^r)` with `r < 1`.
    StretchedExp(f64),
}

impl TailClass {
    /// Whether `E exp(|X|^r)` is finite.
    pub fn has_exp_moment(&self, r: f64) -> bool {
        match *self {
            TailClass::Bounded => true,
            TailClass::SubGaussian => r < 2.0,
            TailClass::ExponentialTail => r < 1.0,
            TailClass::StretchedExp(power) => r < power,
        }
    }
}

/// Linnik condition of order `gamma` for a catalog distribution.
pub fn linnik_holds(dist: &DistributionSpec, gamma: f64) -> Result<bool> {
    let r = linnik_exponent(gamma)?;
    Ok(dist.tail_class().has_exp_moment(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gamma(v: f64) -> OsipovOrder {
        OsipovOrder::new(v).unwrap()
    }

    const GRID: [u64; 4] = [100, 1_000, 10_000, 100_000];

    #[test]
    fn schedule_grammar_round_trips() {
        for src in ["0.05", "0.5*n^-0.3", "2/log(n)", "boundary(0.25)", "1*n^-1"] {
            let e: ScheduleExpr = src.parse().unwrap();
            let back: ScheduleExpr = e.to_string().parse().unwrap();
            assert_eq!(e, back, "{src}");
        }
        assert_eq!("n^-1".parse::<ScheduleExpr>().unwrap(), ScheduleExpr::Power { c: 1.0, p: 1.0 });
        assert_eq!(" 0.01 ".parse::<ScheduleExpr>().unwrap(), ScheduleExpr::Constant(0.01));
    }

    #[test]
    fn schedule_grammar_rejects_garbage() {
        for src in ["", "abc", "1.5", "-0.1", "0.1*n^2", "boundary(x)", "0/log(n)"] {
            assert!(matches!(src.parse::<ScheduleExpr>(), Err(Error::Usage(_))), "{src}");
        }
    }

    #[test]
    fn schedule_values() {
        let e: ScheduleExpr = "0.5*n^-1".parse().unwrap();
        assert!((e.at(100).unwrap().value() - 0.005).abs() < 1e-15);
        let e: ScheduleExpr = "1/log(n)".parse().unwrap();
        assert!((e.at(1000).unwrap().value() - 1.0 / 1000f64.ln()).abs() < 1e-15);
        assert!(e.at(2).is_err());
    }

    #[test]
    fn constant_schedule_holds() {
        let sched = ErrorSchedule::symmetric(ScheduleExpr::Constant(0.05));
        let v = osipov_diagnostic(&sched, gamma(0.25), &GRID).unwrap();
        assert!(v.holds);
        assert!(v.monotone_tail);
        assert_eq!(v.witness.len(), 4);
    }

    #[test]
    fn boundary_schedule_fails_with_constant_witness() {
        let sched = ErrorSchedule::symmetric(ScheduleExpr::Boundary(0.25));
        let v = osipov_diagnostic(&sched, gamma(0.25), &GRID).unwrap();
        assert!(!v.holds);
        for row in &v.witness {
            assert!(row.log_criterion.abs() <= 1e-12, "{row:?}");
        }
    }

    #[test]
    fn mixed_schedule_uses_the_smaller_sequence() {
        let sched = ErrorSchedule::new("1/log(n)".parse().unwrap(), "1*n^-1".parse().unwrap());
        let v = osipov_diagnostic(&sched, gamma(0.25), &GRID).unwrap();
        assert!(v.holds);
        let n = 1000f64;
        let expected = 0.25 * n.ln() + 0.5 * n.sqrt() - n.ln();
        assert!((v.witness[1].log_criterion - expected).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let sched = ErrorSchedule::symmetric(ScheduleExpr::Constant(0.05));
        assert!(matches!(osipov_diagnostic(&sched, gamma(0.25), &[]), Err(Error::Usage(_))));
        assert!(matches!(osipov_diagnostic(&sched, gamma(0.25), &[10, 20, 30]), Err(Error::Usage(_))));
        assert!(matches!(osipov_diagnostic(&sched, gamma(0.25), &[10, 20, 20, 30]), Err(Error::Usage(_))));
    }

    #[test]
    fn order_mapping_examples() {
        assert_eq!(order_for_gamma(0.25).unwrap(), AdjustmentOrder::First);
        assert_eq!(order_for_gamma(0.26).unwrap(), AdjustmentOrder::Second);
        assert_eq!(order_for_gamma(0.3).unwrap(), AdjustmentOrder::Second);
        assert!(matches!(order_for_gamma(0.15), Err(Error::Regime(_))));
        assert!(order_for_gamma(1.0 / 6.0).is_err());
        assert!(order_for_gamma(0.300_000_1).is_err());
    }

    #[test]
    fn linnik_exponent_examples() {
        assert!((linnik_exponent(0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((linnik_exponent(0.3).unwrap() - 0.75).abs() < 1e-15);
        assert!(linnik_exponent(1e-12).unwrap() < 1e-11);
        assert!(linnik_exponent(0.0).is_err());
    }

    #[test]
    fn linnik_catalog() {
        let normal = DistributionSpec::parse("gaussian").unwrap();
        let expo = DistributionSpec::parse("exponential").unwrap();
        let stretched = DistributionSpec::parse("stretched_exp(0.5)").unwrap();
        assert!(linnik_holds(&normal, 0.3).unwrap());
        assert!(linnik_holds(&expo, 0.25).unwrap());
        assert!(!linnik_holds(&stretched, 0.3).unwrap());
        assert!(linnik_holds(&DistributionSpec::parse("uniform").unwrap(), 0.3).unwrap());
        assert!(linnik_holds(&DistributionSpec::parse("poisson(1)").unwrap(), 0.3).unwrap());
    }

    proptest! {
        #[test]
        fn order_partition_matches_general_bound(g in 0.0f64..0.5) {
            match order_for_gamma(g) {
                Ok(s) => {
                    let s = s.index() as f64;
                    prop_assert!(s / (2.0 * s + 4.0) < g && g <= (s + 1.0) / (2.0 * s + 6.0));
                }
                Err(_) => prop_assert!(g <= 1.0 / 6.0 || g > 0.3),
            }
        }

        #[test]
        fn linnik_exponent_increasing_and_bounded(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9 * hi);
            let (rl, rh) = (linnik_exponent(lo).unwrap(), linnik_exponent(hi).unwrap());
            prop_assert!(rl < rh);
            prop_assert!(rh < 2.0);
        }

        #[test]
        fn admissible_exponent_range(g in 0.1667f64..=0.3) {
            prop_assume!(g > 1.0 / 6.0);
            let r = linnik_exponent(g).unwrap();
            prop_assert!(r > 0.5 && r <= 0.75 + 1e-15);
        }
    }
}
