//! Simulation reports: one row per (n, side, order, event) cell plus a JSON
//! header with the plan echo and diagnostics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adjustment::AdjustmentOrder;
use crate::error::{Error, Result};
use crate::inference::{IntervalKind, TestRule};
use crate::regimes::RegimeVerdict;
use crate::simulation::plan::{ExperimentPlan, MIN_EXPECTED_EVENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    NonCoverTrue,
    CoverUnderAlternative,
    RejectUnderNull,
    AcceptUnderAlternative,
    /// The two test rules decide differently under the null.
    RuleDisagreement,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::NonCoverTrue => "non_cover_true",
            Event::CoverUnderAlternative => "cover_under_alternative",
            Event::RejectUnderNull => "reject_under_null",
            Event::AcceptUnderAlternative => "accept_under_alternative",
            Event::RuleDisagreement => "rule_disagreement",
        }
    }
}

fn side_str(side: IntervalKind) -> &'static str {
    match side {
        IntervalKind::Upper => "upper",
        IntervalKind::Lower => "lower",
        IntervalKind::TwoSided => "two_sided",
    }
}

fn rule_str(rule: Option<TestRule>) -> &'static str {
    match rule {
        None => "",
        Some(TestRule::AdjustedQuantile) => "adjusted_quantile",
        Some(TestRule::AdjustedStatistic) => "adjusted_statistic",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub side: IntervalKind,
    pub order: AdjustmentOrder,
    pub level_alpha: f64,
    pub level_beta: f64,
    pub event: Event,
    pub count: u64,
    pub empirical_prob: f64,
    pub mc_standard_error: f64,
    pub ratio_to_nominal: f64,
    pub replications: u64,
    pub seed: u64,
    /// Set on test-decision rows.
    pub rule: Option<TestRule>,
    pub low_power: bool,
}

impl ReportRow {
    /// Builds a row from an event count; `nominal` is the level the
    /// frequency is compared with.
    #[allow(clippy::too_many_arguments)]
    pub fn from_count(
        n: u64,
        side: IntervalKind,
        order: AdjustmentOrder,
        levels: (f64, f64),
        event: Event,
        rule: Option<TestRule>,
        count: u64,
        nominal: f64,
        replications: u64,
        seed: u64,
    ) -> Self {
        let r = replications as f64;
        let p = count as f64 / r;
        ReportRow {
            n,
            side,
            order,
            level_alpha: levels.0,
            level_beta: levels.1,
            event,
            count,
            empirical_prob: p,
            mc_standard_error: (p * (1.0 - p) / r).sqrt(),
            ratio_to_nominal: p / nominal,
            replications,
            seed,
            rule,
            low_power: r * nominal < MIN_EXPECTED_EVENTS,
        }
    }

    /// Standard error of `ratio_to_nominal`.
    pub fn ratio_standard_error(&self) -> f64 {
        self.mc_standard_error * self.ratio_to_nominal / self.empirical_prob.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsipovCheck {
    /// Which schedule pair was checked, e.g. `alpha/beta`.
    pub pair: String,
    pub grid: Vec<u64>,
    pub verdict: Option<RegimeVerdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub linnik_exponent: f64,
    pub linnik_holds: bool,
    pub implied_order: AdjustmentOrder,
    pub osipov: Vec<OsipovCheck>,
    pub warnings: Vec<String>,
}

/// Trend summary of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub largest_n: u64,
    pub baseline_abs_error: f64,
    /// `(order, |ratio - 1|)` at the largest n for every order.
    pub abs_error_at_largest_n: Vec<(AdjustmentOrder, f64)>,
    /// Adjusted orders whose `|ratio - 1|` exceeds the baseline's at the
    /// largest n.
    pub orders_worse_than_baseline: Vec<AdjustmentOrder>,
    /// Orders whose `|ratio - 1|` decreases along the whole grid.
    pub monotone_improvement: Vec<(AdjustmentOrder, bool)>,
    pub adjusted_not_worse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub experiment: String,
    pub code_version: String,
    pub seed: u64,
    pub plan: ExperimentPlan,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "n",
    "side",
    "order",
    "level_alpha",
    "level_beta",
    "event",
    "empirical_prob",
    "mc_standard_error",
    "ratio_to_nominal",
    "replications",
    "seed",
    "rule",
    "count",
    "low_power",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl SimulationReport {
    pub fn any_low_power(&self) -> bool {
        self.rows.iter().any(|r| r.low_power)
    }

    pub fn find(
        &self,
        n: u64,
        side: IntervalKind,
        order: AdjustmentOrder,
        event: Event,
        rule: Option<TestRule>,
    ) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.side == side && r.order == order && r.event == event && r.rule == rule)
    }

    /// CSV body; floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                side_str(r.side).to_string(),
                u8::from(r.order).to_string(),
                num(r.level_alpha),
                num(r.level_beta),
                r.event.as_str().to_string(),
                num(r.empirical_prob),
                num(r.mc_standard_error),
                num(r.ratio_to_nominal),
                r.replications.to_string(),
                r.seed.to_string(),
                rule_str(r.rule).to_string(),
                r.count.to_string(),
                r.low_power.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is ASCII")
    }

    pub fn header_json(&self) -> String {
        serde_json::to_string_pretty(&self.header).expect("header is plain data")
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        let json_path = stem.with_extension("json");
        std::fs::write(&csv_path, self.to_csv())
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", csv_path.display())))?;
        std::fs::write(&json_path, self.header_json())
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", json_path.display())))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_statistics() {
        let r = ReportRow::from_count(
            100,
            IntervalKind::Upper,
            AdjustmentOrder::First,
            (0.01, 0.02),
            Event::NonCoverTrue,
            None,
            250,
            0.01,
            20_000,
            9,
        );
        assert_eq!(r.empirical_prob, 0.0125);
        assert_eq!(r.ratio_to_nominal, 1.25);
        assert!((r.mc_standard_error - (0.0125f64 * 0.9875 / 20_000.0).sqrt()).abs() < 1e-18);
        assert!(!r.low_power);
        let r = ReportRow::from_count(
            100,
            IntervalKind::Upper,
            AdjustmentOrder::First,
            (0.01, 0.02),
            Event::NonCoverTrue,
            None,
            0,
            0.01,
            5_000,
            9,
        );
        assert!(r.low_power);
        assert_eq!(r.empirical_prob, 0.0);
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }
}
