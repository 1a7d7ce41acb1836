//! Experiment plans and their TOML file format.
//!
//! ```toml
//! dist = "exponential"     # catalog name
//! mean = 0.0               # optional mean of the sampled law, default 0
//! negated = false          # optional, sample -X (shifted to `mean`) instead of X
//! n_grid = [400]
//! alpha = 0.01             # number or schedule expression, e.g. "0.5*n^-0.5"
//! beta = 0.01              # optional, defaults to alpha
//! alpha2 = 0.01            # optional right-hand level of two-sided intervals
//! gamma = 0.25
//! orders = [0, 1]
//! sides = ["upper", "lower", "two_sided"]
//! replications = 2000000
//! seed = 42
//! ```

use serde::{Deserialize, Serialize};

use crate::adjustment::AdjustmentOrder;
use crate::error::{Error, Result};
use crate::inference::IntervalKind;
use crate::regimes::{ErrorSchedule, OsipovOrder, ScheduleExpr};
use crate::simulation::distribution::DistributionSpec;

/// Minimum expected number of events per report cell.
pub const MIN_EXPECTED_EVENTS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanFile", into = "PlanFile")]
pub struct ExperimentPlan {
    pub dist: DistributionSpec,
    pub n_grid: Vec<u64>,
    pub schedule: ErrorSchedule,
    /// Right-hand level of two-sided intervals; `alpha` if absent.
    pub alpha2: Option<ScheduleExpr>,
    pub gamma: OsipovOrder,
    pub orders: Vec<AdjustmentOrder>,
    pub sides: Vec<IntervalKind>,
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    dist: String,
    #[serde(default)]
    mean: f64,
    #[serde(default)]
    negated: bool,
    n_grid: Vec<u64>,
    alpha: ScheduleExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<ScheduleExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha2: Option<ScheduleExpr>,
    gamma: f64,
    orders: Vec<AdjustmentOrder>,
    sides: Vec<IntervalKind>,
    replications: u64,
    seed: u64,
}

impl TryFrom<PlanFile> for ExperimentPlan {
    type Error = Error;

    fn try_from(f: PlanFile) -> Result<Self> {
        let base = DistributionSpec::parse(&f.dist)?;
        let dist = if f.negated { base.with_mean(-f.mean).negated() } else { base.with_mean(f.mean) };
        let mut orders = f.orders;
        orders.sort();
        orders.dedup();
        let mut sides = Vec::new();
        for s in f.sides {
            if !sides.contains(&s) {
                sides.push(s);
            }
        }
        let plan = ExperimentPlan {
            dist,
            n_grid: f.n_grid,
            schedule: ErrorSchedule::new(f.alpha, f.beta.unwrap_or(f.alpha)),
            alpha2: f.alpha2,
            gamma: OsipovOrder::new(f.gamma)?,
            orders,
            sides,
            replications: f.replications,
            seed: f.seed,
        };
        plan.check_structure()?;
        Ok(plan)
    }
}

impl From<ExperimentPlan> for PlanFile {
    fn from(p: ExperimentPlan) -> Self {
        PlanFile {
            dist: p.dist.name(),
            mean: p.dist.mean(),
            negated: p.dist.is_negated(),
            n_grid: p.n_grid,
            alpha: p.schedule.alpha,
            beta: Some(p.schedule.beta),
            alpha2: p.alpha2,
            gamma: p.gamma.value(),
            orders: p.orders,
            sides: p.sides,
            replications: p.replications,
            seed: p.seed,
        }
    }
}

/// Error levels of one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLevels {
    pub alpha: f64,
    pub beta: f64,
    pub alpha2: f64,
}

impl ExperimentPlan {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Usage(format!("invalid plan file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plan fields are always representable in TOML")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read plan file {}: {e}", path.display())))?;
        Self::from_toml_str(&src)
    }

    fn check_structure(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Usage("n_grid must be a non-empty list of positive sample sizes".into()));
        }
        if self.orders.is_empty() {
            return Err(Error::Usage("orders must list at least one adjustment order".into()));
        }
        if self.sides.is_empty() {
            return Err(Error::Usage("sides must list at least one of upper, lower, two_sided".into()));
        }
        if self.replications == 0 {
            return Err(Error::Usage("replications must be positive".into()));
        }
        Ok(())
    }

    pub fn levels_at(&self, n: u64) -> Result<CellLevels> {
        let alpha = self.schedule.alpha_at(n)?.value();
        let beta = self.schedule.beta_at(n)?.value();
        let alpha2 = match self.alpha2 {
            Some(e) => e.at(n)?.value(),
            None => alpha,
        };
        Ok(CellLevels { alpha, beta, alpha2 })
    }

    /// Checks the plan before any sampling: every level must be defined on
    /// the grid, two-sided levels must sum below one, and each cell must
    /// expect at least [`MIN_EXPECTED_EVENTS`] events.
    pub fn validate(&self) -> Result<()> {
        self.check_structure()?;
        let two_sided = self.sides.contains(&IntervalKind::TwoSided);
        for &n in &self.n_grid {
            let lv = self.levels_at(n).map_err(|e| Error::Usage(format!("infeasible plan: {e}")))?;
            let mut smallest = lv.alpha.min(lv.beta);
            if two_sided {
                if lv.alpha + lv.alpha2 >= 1.0 {
                    return Err(Error::Usage(format!(
                        "infeasible plan: two-sided levels alpha + alpha2 = {} must be below 1 at n = {n}",
                        lv.alpha + lv.alpha2
                    )));
                }
                smallest = smallest.min(lv.alpha2);
            }
            let expected = self.replications as f64 * smallest;
            if expected < MIN_EXPECTED_EVENTS {
                return Err(Error::Usage(format!(
                    "infeasible plan: replications * min level = {} * {smallest:e} = {expected:.3} < {MIN_EXPECTED_EVENTS} \
                     expected events at n = {n}",
                    self.replications
                )));
            }
        }
        Ok(())
    }
}
