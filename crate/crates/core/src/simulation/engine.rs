//! Replication loop and the three experiment kinds.
//!
//! Every replication draws one centered sample mean `c̄` from its own stream
//! and evaluates all cells of a grid point on it: the sample mean under the
//! true mean is `μ + c̄` and under an alternative `μ₁ + c̄` (common random
//! numbers). Counts are integers, so merging worker results is exact and the
//! report does not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjustment::AdjustmentOrder;
use crate::error::{Error, Result};
use crate::gaussian::Probability;
use crate::inference::{
    self, ConfidenceInterval, GaussTest, IntervalKind, Side, TestRule,
};
use crate::regimes::{self, ErrorSchedule, OsipovOrder};
use crate::simulation::distribution::{DistributionSpec, Sampler};
use crate::simulation::plan::ExperimentPlan;
use crate::simulation::report::{
    Diagnostics, Event, OsipovCheck, ReportHeader, ReportRow, SimulationReport, SweepSummary,
};
use crate::simulation::rng::StreamKey;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { workers: 1 }
    }
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        RunOptions { workers }
    }
}

/// Counts events over `reps` replications. `eval` receives the centered
/// sample mean of one replication and increments slots of its accumulator.
fn tally<F>(
    key: StreamKey,
    sampler: &Sampler,
    n: u64,
    reps: u64,
    slots: usize,
    opts: RunOptions,
    eval: F,
) -> Result<Vec<u64>>
where
    F: Fn(f64, &mut [u64]) + Sync,
{
    let run_chunk = |c: u64| {
        let mut acc = vec![0u64; slots];
        for rep in c * CHUNK..((c + 1) * CHUNK).min(reps) {
            let mut rng = key.replication(rep);
            eval(sampler.centered_mean(&mut rng, n), &mut acc);
        }
        acc
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };
    let chunks = reps.div_ceil(CHUNK);
    match opts.workers {
        0 => Err(Error::Usage("worker count must be at least 1".into())),
        1 => Ok((0..chunks).map(run_chunk).fold(vec![0u64; slots], merge)),
        w => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Usage(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(|| {
                (0..chunks).into_par_iter().map(run_chunk).reduce(|| vec![0u64; slots], merge)
            }))
        }
    }
}

/// Osipov grid: the plan grid, extended by factors of ten to the minimum
/// length the diagnostic needs.
fn diagnostic_grid(n_grid: &[u64]) -> Vec<u64> {
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    while grid.len() < regimes::OSIPOV_TAIL_STEPS + 1 {
        let last = *grid.last().expect("grid is non-empty");
        grid.push(last.saturating_mul(10));
    }
    grid
}

fn diagnostics(plan: &ExperimentPlan) -> Diagnostics {
    let gamma = plan.gamma.value();
    let linnik_exponent = regimes::linnik_exponent(gamma).expect("validated gamma is positive");
    let linnik_holds = regimes::linnik_holds(&plan.dist, gamma).expect("validated gamma is positive");
    let mut warnings = Vec::new();
    if !linnik_holds {
        warnings.push(format!(
            "Linnik condition fails: {} has no finite E exp(|X - mu|^{linnik_exponent})",
            plan.dist.name()
        ));
    }
    let implied_order = plan.gamma.order();
    let grid = diagnostic_grid(&plan.n_grid);
    let mut pairs = vec![("alpha/beta".to_string(), plan.schedule)];
    if let Some(a2) = plan.alpha2 {
        pairs.push(("alpha2/beta".to_string(), ErrorSchedule::new(a2, plan.schedule.beta)));
    }
    let osipov = pairs
        .into_iter()
        .map(|(pair, sched)| match regimes::osipov_diagnostic(&sched, plan.gamma, &grid) {
            Ok(v) => {
                if !v.holds {
                    warnings.push(format!(
                        "Osipov-type condition fails for {pair} ({}) at gamma = {gamma} on grid {grid:?}",
                        sched.description()
                    ));
                }
                OsipovCheck { pair, grid: grid.clone(), verdict: Some(v), error: None }
            }
            Err(e) => {
                warnings.push(format!("Osipov-type condition not evaluated for {pair}: {e}"));
                OsipovCheck { pair, grid: grid.clone(), verdict: None, error: Some(e.to_string()) }
            }
        })
        .collect();
    Diagnostics { linnik_exponent, linnik_holds, implied_order, osipov, warnings }
}

fn header(plan: &ExperimentPlan, experiment: &str, notes: Vec<String>) -> ReportHeader {
    ReportHeader {
        experiment: experiment.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: plan.seed,
        plan: plan.clone(),
        diagnostics: diagnostics(plan),
        sweep: None,
        notes,
    }
}

fn prob(v: f64) -> Probability {
    Probability::new(v).expect("plan levels are validated")
}

struct CoverageCell {
    side: IntervalKind,
    order: AdjustmentOrder,
    template: ConfidenceInterval,
    alternatives: Vec<f64>,
    non_cover_nominal: f64,
    beta: f64,
}

const COVERAGE_SLOTS: usize = 3;

fn coverage_cells(plan: &ExperimentPlan, n: u64) -> Result<Vec<CoverageCell>> {
    let m = plan.dist.moments();
    let mu = m.mu;
    let lv = plan.levels_at(n)?;
    let (a1, a2, b) = (prob(lv.alpha), prob(lv.alpha2), prob(lv.beta));
    let mut cells = Vec::new();
    for &side in &plan.sides {
        for &s in &plan.orders {
            let cell = match side {
                IntervalKind::Upper => CoverageCell {
                    side,
                    order: s,
                    template: inference::upper_interval(mu, n, &m, a1, s)?,
                    alternatives: vec![inference::local_alternative(mu, n, &m, a1, b, s, Side::Upper)?.value],
                    non_cover_nominal: lv.alpha,
                    beta: lv.beta,
                },
                IntervalKind::Lower => CoverageCell {
                    side,
                    order: s,
                    template: inference::lower_interval(mu, n, &m, a1, s)?,
                    alternatives: vec![inference::local_alternative(mu, n, &m, a1, b, s, Side::Lower)?.value],
                    non_cover_nominal: lv.alpha,
                    beta: lv.beta,
                },
                IntervalKind::TwoSided => CoverageCell {
                    side,
                    order: s,
                    template: inference::two_sided_interval(mu, n, &m, a1, a2, s)?,
                    alternatives: vec![
                        inference::local_alternative(mu, n, &m, a1, b, s, Side::Upper)?.value,
                        inference::local_alternative(mu, n, &m, a2, b, s, Side::Lower)?.value,
                    ],
                    non_cover_nominal: lv.alpha + lv.alpha2,
                    beta: lv.beta,
                },
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}

/// Non-coverage at the true mean and coverage of the true mean under the
/// modified local alternative, for every `(n, side, order)`.
///
/// Two-sided cells are checked at both one-sided alternatives and report the
/// larger coverage frequency.
pub fn run_coverage_experiment(plan: &ExperimentPlan, opts: RunOptions) -> Result<SimulationReport> {
    plan.validate()?;
    let mut notes = vec!["alternative-mean samples reuse the true-mean draws shifted by mu1 - mu".to_string()];
    if plan.sides.contains(&IntervalKind::TwoSided) {
        notes.push(
            "two_sided rows: level_alpha and the non_cover_true nominal are alpha + alpha2; \
             cover_under_alternative is the larger of the two one-sided alternatives"
                .to_string(),
        );
    }
    let hdr = header(plan, "coverage", notes);
    let sampler = plan.dist.sampler();
    let mu = plan.dist.mean();
    let r = plan.replications;
    let mut rows = Vec::new();
    for &n in &plan.n_grid {
        let cells = coverage_cells(plan, n)?;
        let counts = tally(StreamKey::new(plan.seed, n), &sampler, n, r, cells.len() * COVERAGE_SLOTS, opts, |cbar, acc| {
            for (i, cell) in cells.iter().enumerate() {
                let base = i * COVERAGE_SLOTS;
                let mut ci = cell.template;
                ci.xbar = mu + cbar;
                if !ci.covers(mu) {
                    acc[base] += 1;
                }
                for (j, &alt) in cell.alternatives.iter().enumerate() {
                    ci.xbar = alt + cbar;
                    if ci.covers(mu) {
                        acc[base + 1 + j] += 1;
                    }
                }
            }
        })?;
        for (i, cell) in cells.iter().enumerate() {
            let base = i * COVERAGE_SLOTS;
            let levels = (cell.non_cover_nominal, cell.beta);
            rows.push(ReportRow::from_count(
                n, cell.side, cell.order, levels, Event::NonCoverTrue, None,
                counts[base], cell.non_cover_nominal, r, plan.seed,
            ));
            let cover = counts[base + 1..base + 1 + cell.alternatives.len()].iter().copied().max().unwrap_or(0);
            rows.push(ReportRow::from_count(
                n, cell.side, cell.order, levels, Event::CoverUnderAlternative, None,
                cover, cell.beta, r, plan.seed,
            ));
        }
    }
    Ok(SimulationReport { header: hdr, rows })
}

struct PowerCell {
    order: AdjustmentOrder,
    by_quantile: GaussTest,
    by_statistic: GaussTest,
    alternative: f64,
}

const POWER_SLOTS: usize = 5;

/// Size and type II error of the one-sided test `H₀: μ ≤ μ₀` (with `μ₀` the
/// plan mean) under both decision rules, plus the rate at which the rules
/// disagree under the null.
///
/// For the adjusted-statistic rule a standardized mean outside the monotone
/// branch counts as a rejection above the branch and as an acceptance below
/// it. Plan sides are ignored.
pub fn run_power_experiment(plan: &ExperimentPlan, opts: RunOptions) -> Result<SimulationReport> {
    plan.validate()?;
    let notes = vec![
        "one-sided tests of H0: mu <= mu0 with mu0 the plan mean; plan sides are ignored".to_string(),
        "adjusted_statistic rule: standardized means above the monotone branch reject, below it accept".to_string(),
        "rule_disagreement rows count null samples on which the two rules decide differently".to_string(),
    ];
    let hdr = header(plan, "power", notes);
    let sampler = plan.dist.sampler();
    let m = plan.dist.moments();
    let mu0 = m.mu;
    let r = plan.replications;
    let mut rows = Vec::new();
    for &n in &plan.n_grid {
        let lv = plan.levels_at(n)?;
        let (a, b) = (prob(lv.alpha), prob(lv.beta));
        let cells = plan
            .orders
            .iter()
            .map(|&s| {
                Ok(PowerCell {
                    order: s,
                    by_quantile: GaussTest::new(n, &m, mu0, a, s, TestRule::AdjustedQuantile)?,
                    by_statistic: GaussTest::new(n, &m, mu0, a, s, TestRule::AdjustedStatistic)?,
                    alternative: inference::local_alternative(mu0, n, &m, a, b, s, Side::Upper)?.value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = tally(StreamKey::new(plan.seed, n), &sampler, n, r, cells.len() * POWER_SLOTS, opts, |cbar, acc| {
            for (i, cell) in cells.iter().enumerate() {
                let base = i * POWER_SLOTS;
                let x0 = mu0 + cbar;
                let rq = cell.by_quantile.rejects(x0);
                let rs = cell.by_statistic.rejects(x0);
                acc[base] += rq as u64;
                acc[base + 1] += rs as u64;
                let x1 = cell.alternative + cbar;
                acc[base + 2] += !cell.by_quantile.rejects(x1) as u64;
                acc[base + 3] += !cell.by_statistic.rejects(x1) as u64;
                acc[base + 4] += (rq != rs) as u64;
            }
        })?;
        let levels = (lv.alpha, lv.beta);
        let side = IntervalKind::Upper;
        for (i, cell) in cells.iter().enumerate() {
            let base = i * POWER_SLOTS;
            let s = cell.order;
            let q = Some(TestRule::AdjustedQuantile);
            let st = Some(TestRule::AdjustedStatistic);
            rows.push(ReportRow::from_count(n, side, s, levels, Event::RejectUnderNull, q, counts[base], lv.alpha, r, plan.seed));
            rows.push(ReportRow::from_count(n, side, s, levels, Event::RejectUnderNull, st, counts[base + 1], lv.alpha, r, plan.seed));
            rows.push(ReportRow::from_count(n, side, s, levels, Event::AcceptUnderAlternative, q, counts[base + 2], lv.beta, r, plan.seed));
            rows.push(ReportRow::from_count(n, side, s, levels, Event::AcceptUnderAlternative, st, counts[base + 3], lv.beta, r, plan.seed));
            rows.push(ReportRow::from_count(n, side, s, levels, Event::RuleDisagreement, None, counts[base + 4], lv.alpha, r, plan.seed));
        }
    }
    Ok(SimulationReport { header: hdr, rows })
}

/// Upper-interval coverage over a growing grid, with a trend summary in the
/// header. The unadjusted order is always included as the baseline.
#[allow(clippy::too_many_arguments)]
pub fn convergence_sweep(
    dist: &DistributionSpec,
    gamma: OsipovOrder,
    schedule: &ErrorSchedule,
    n_grid: &[u64],
    orders: &[AdjustmentOrder],
    replications: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<SimulationReport> {
    if n_grid.len() < 3 {
        return Err(Error::Usage(format!("convergence sweep needs at least 3 sample sizes, got {}", n_grid.len())));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("convergence sweep grid must be strictly increasing".into()));
    }
    for w in n_grid.windows(2) {
        let (a0, a1) = (schedule.alpha.ln_at(w[0]), schedule.alpha.ln_at(w[1]));
        if a1 >= a0 {
            return Err(Error::Usage(format!(
                "convergence sweep needs alpha(n) decreasing along the grid; {} does not decrease from n = {} to n = {}",
                schedule.alpha, w[0], w[1]
            )));
        }
    }
    let mut all_orders = orders.to_vec();
    all_orders.push(AdjustmentOrder::Unadjusted);
    all_orders.sort();
    all_orders.dedup();
    let plan = ExperimentPlan {
        dist: *dist,
        n_grid: n_grid.to_vec(),
        schedule: *schedule,
        alpha2: None,
        gamma,
        orders: all_orders.clone(),
        sides: vec![IntervalKind::Upper],
        replications,
        seed,
    };
    let mut report = run_coverage_experiment(&plan, opts)?;
    report.header.experiment = "convergence_sweep".to_string();

    let abs_err = |n: u64, s: AdjustmentOrder| {
        let row = report
            .find(n, IntervalKind::Upper, s, Event::NonCoverTrue, None)
            .expect("every grid cell has a row");
        (row.ratio_to_nominal - 1.0).abs()
    };
    let largest_n = *n_grid.last().expect("grid has at least 3 points");
    let baseline_abs_error = abs_err(largest_n, AdjustmentOrder::Unadjusted);
    let abs_error_at_largest_n: Vec<_> = all_orders.iter().map(|&s| (s, abs_err(largest_n, s))).collect();
    let orders_worse_than_baseline: Vec<_> = abs_error_at_largest_n
        .iter()
        .filter(|(s, e)| *s != AdjustmentOrder::Unadjusted && *e > baseline_abs_error)
        .map(|(s, _)| *s)
        .collect();
    let monotone_improvement = all_orders
        .iter()
        .map(|&s| {
            let errs: Vec<f64> = n_grid.iter().map(|&n| abs_err(n, s)).collect();
            (s, errs.windows(2).all(|w| w[1] < w[0]))
        })
        .collect();
    let adjusted_not_worse = orders_worse_than_baseline.is_empty();
    if !adjusted_not_worse {
        report.header.diagnostics.warnings.push(format!(
            "adjusted orders {orders_worse_than_baseline:?} are farther from nominal than the baseline at n = {largest_n}"
        ));
    }
    report.header.sweep = Some(SweepSummary {
        largest_n,
        baseline_abs_error,
        abs_error_at_largest_n,
        orders_worse_than_baseline,
        monotone_improvement,
        adjusted_not_worse,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub n: u64,
    pub x: f64,
    pub replications: u64,
    pub hits: u64,
    pub probability: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of `P(√n (X̄ - μ)/σ > x)`.
pub fn estimate_upper_tail(
    dist: &DistributionSpec,
    n: u64,
    x: f64,
    replications: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<TailEstimate> {
    if n == 0 || replications == 0 {
        return Err(Error::Usage("tail estimate needs positive n and replications".into()));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("tail point must be finite, got {x}")));
    }
    let m = dist.moments();
    let hits = tally(StreamKey::new(seed, n), &dist.sampler(), n, replications, 1, opts, |cbar, acc| {
        acc[0] += (inference::standardized(m.mu + cbar, m.mu, m.sigma, n) > x) as u64;
    })?[0];
    let r = replications as f64;
    let p = hits as f64 / r;
    Ok(TailEstimate { n, x, replications, hits, probability: p, standard_error: (p * (1.0 - p) / r).sqrt() })
}
