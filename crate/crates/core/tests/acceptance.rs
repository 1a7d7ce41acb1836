//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewadj::adjustment::{self, quantile_cubic_coefficient, skew_coefficient, statistic_cubic_coefficient};
use skewadj::expfam::{self, CumulantSpec};
use skewadj::gaussian::{self, Probability};
use skewadj::inference::{IntervalKind, TestRule};
use skewadj::regimes::{ErrorSchedule, OsipovOrder, ScheduleExpr};
use skewadj::simulation::{
    estimate_upper_tail, run_coverage_experiment, run_power_experiment, DistributionSpec, Event, ExperimentPlan,
    RunOptions, SimulationReport,
};
use skewadj::{AdjustmentOrder, MomentProfile, Sign};

use AdjustmentOrder::{First, Second, Unadjusted};

const SEED: u64 = 20_240_611;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn p(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo && v <= hi
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn plan(dist: DistributionSpec, n: u64, level: f64, orders: Vec<AdjustmentOrder>, sides: Vec<IntervalKind>, r: u64) -> ExperimentPlan {
    ExperimentPlan {
        dist,
        n_grid: vec![n],
        schedule: ErrorSchedule::symmetric(ScheduleExpr::Constant(level)),
        alpha2: None,
        gamma: OsipovOrder::new(0.25).unwrap(),
        orders,
        sides,
        replications: r,
        seed: SEED,
    }
}

fn exponential() -> DistributionSpec {
    DistributionSpec::parse("exponential").unwrap()
}

fn theorem1_plan() -> ExperimentPlan {
    plan(exponential(), 400, 0.01, vec![Unadjusted, First], vec![IntervalKind::Upper], 2_000_000)
}

fn upper_row(rep: &SimulationReport, n: u64, s: AdjustmentOrder, event: Event) -> (f64, f64, u64) {
    let row = rep.find(n, IntervalKind::Upper, s, event, None).expect("row present");
    (row.ratio_to_nominal, row.ratio_standard_error(), row.count)
}

fn quantile_fidelity() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_p = 0.0;
    let half = 1000;
    // Lower half log-spaced in [1e-280, 0.5]; upper half p = 1 - q with q
    // log-spaced in [1e-16, 0.5], compared through the upper tail mass.
    for i in 0..half {
        let t = i as f64 / (half - 1) as f64;
        let lp = (1e-280f64).ln() + t * ((0.5f64).ln() - (1e-280f64).ln());
        let prob = lp.exp();
        let x = gaussian::normal_quantile(p(prob));
        let err = (gaussian::normal_cdf(x).unwrap() - prob).abs() / prob;
        if err > worst {
            worst = err;
            worst_p = prob;
        }
        let lq = (1e-16f64).ln() + t * ((0.5f64).ln() - (1e-16f64).ln());
        let upper = 1.0 - lq.exp();
        if upper >= 1.0 || upper <= 0.5 {
            continue;
        }
        let tail = 1.0 - upper;
        let x = gaussian::normal_quantile(p(upper));
        let err = (gaussian::normal_sf(x).unwrap() - tail).abs() / tail;
        if err > worst {
            worst = err;
            worst_p = upper;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max relative round-trip error {worst:.3e} at p = {worst_p:e}; {:.3} s", secs(elapsed)),
    )
}

fn large_quantile_rate() -> Verdict {
    let start = Instant::now();
    let alphas = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14];
    let rel = |a: f64| {
        let z = gaussian::upper_quantile(p(a));
        (gaussian::large_quantile_approx(p(a)).unwrap() - z).abs() / z
    };
    let rate = |a: f64| {
        let l = a.ln();
        l.abs().ln() / (l * l)
    };
    let c = 1.5 * rel(1e-4) / rate(1e-4);
    let mut ok = true;
    let mut parts = Vec::new();
    for a in alphas {
        let e = rel(a);
        let bound = c * rate(a);
        ok &= e <= bound;
        parts.push(format!("e({a:e})={e:.3e}<={bound:.3e}"));
    }
    let decreasing = rel(1e-14) < rel(1e-6);
    let elapsed = start.elapsed();
    verdict(
        ok && decreasing && elapsed < Duration::from_secs(1),
        format!("C = {c:.4}; {}; e(1e-14) < e(1e-6): {decreasing}; {:.3} s", parts.join(", "), secs(elapsed)),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn coefficient_duality() -> Verdict {
    let start = Instant::now();
    // The identity is polynomial of degree 2 in g1 and 1 in g2, so agreement
    // on a 3 x 2 grid of distinct rationals proves it for all g1, g2.
    let mut symbolic = true;
    for g1 in [Rational64::new(-7, 3), Rational64::new(0, 1), Rational64::new(6, 5)] {
        for g2 in [Rational64::new(3, 1), Rational64::new(-1, 2)] {
            let a = skew_coefficient(g1);
            let lhs = statistic_cubic_coefficient(g1, g2);
            let rhs = quantile_cubic_coefficient(g1, g2) - Rational64::from_integer(2) * a * a;
            symbolic &= lhs == rhs;
        }
    }
    let m = MomentProfile::standardized(1.2, 3.0).unwrap();
    let z = gaussian::upper_quantile(p(0.01));
    let ns = [100u64, 1_000, 10_000, 100_000];
    let mut ok = symbolic;
    let mut parts = Vec::new();
    for (s, target) in [(First, -1.0), (Second, -1.5)] {
        let logs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let res: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let zq = adjustment::adjusted_quantile(p(0.01), n, &m, s, Sign::Plus).unwrap();
                (adjustment::adjusted_statistic(zq, n, &m, s).unwrap() - z).abs().ln()
            })
            .collect();
        let b = slope(&logs, &res);
        ok &= within(b, target - 0.3, target + 0.3);
        parts.push(format!("s={s} slope {b:.4} (target {target})"));
    }
    let elapsed = start.elapsed();
    verdict(
        ok && elapsed < Duration::from_secs(1),
        format!("rational identity: {symbolic}; {}; {:.3} s", parts.join(", "), secs(elapsed)),
    )
}

fn theorem1(report: &SimulationReport, elapsed: Duration) -> Verdict {
    let (r1, se1, _) = upper_row(report, 400, First, Event::NonCoverTrue);
    let (r0, se0, _) = upper_row(report, 400, Unadjusted, Event::NonCoverTrue);
    let (rc, sec, _) = upper_row(report, 400, First, Event::CoverUnderAlternative);
    let a = within(r1, 0.90, 1.10);
    let b = !within(r0, 0.90, 1.10);
    let c = within(rc, 0.85, 1.15);
    verdict(
        a && b && c && elapsed <= Duration::from_secs(600),
        format!(
            "(a) s=1 non-cover ratio {r1:.4} ± {se1:.4}; (b) s=0 ratio {r0:.4} ± {se0:.4}; \
             (c) s=1 cover-under-alternative ratio {rc:.4} ± {sec:.4}; {:.1} s single worker",
            secs(elapsed)
        ),
    )
}

fn theorem2() -> Verdict {
    let start = Instant::now();
    let pl = plan(exponential(), 1600, 0.005, vec![First, Second], vec![IntervalKind::Upper], 2_000_000);
    let rep = run_coverage_experiment(&pl, RunOptions::default()).unwrap();
    let (r2, se2, _) = upper_row(&rep, 1600, Second, Event::NonCoverTrue);
    let (r1, se1, _) = upper_row(&rep, 1600, First, Event::NonCoverTrue);
    let combined = (se1 * se1 + se2 * se2).sqrt();
    let ok = within(r2, 0.90, 1.10) && (r2 - 1.0).abs() <= (r1 - 1.0).abs() + 2.0 * combined;
    verdict(
        ok,
        format!(
            "s=2 ratio {r2:.4} ± {se2:.4}; s=1 ratio {r1:.4} ± {se1:.4}; |r2-1| = {:.4} vs |r1-1| + 2se = {:.4}; {:.1} s",
            (r2 - 1.0).abs(),
            (r1 - 1.0).abs() + 2.0 * combined,
            secs(start.elapsed())
        ),
    )
}

fn theorem4() -> Verdict {
    let start = Instant::now();
    let pl = theorem1_plan();
    let rep = run_power_experiment(&pl, RunOptions::default()).unwrap();
    let size = rep
        .find(400, IntervalKind::Upper, First, Event::RejectUnderNull, Some(TestRule::AdjustedStatistic))
        .unwrap();
    let dis = rep.find(400, IntervalKind::Upper, First, Event::RuleDisagreement, None).unwrap();
    let agreement = 1.0 - dis.empirical_prob;
    let ok = within(size.ratio_to_nominal, 0.90, 1.10) && agreement >= 1.0 - 0.01 / 2.0;
    verdict(
        ok,
        format!(
            "adjusted-statistic size ratio {:.4} ± {:.4}; agreement with adjusted-quantile rule {agreement:.6} \
             ({} disagreements in {}); {:.1} s",
            size.ratio_to_nominal,
            size.ratio_standard_error(),
            dis.count,
            dis.replications,
            secs(start.elapsed())
        ),
    )
}

fn mirror_and_two_sided() -> Verdict {
    let start = Instant::now();
    let lower = plan(exponential(), 400, 0.01, vec![Unadjusted, First, Second], vec![IntervalKind::Lower], 200_000);
    let upper = ExperimentPlan { dist: lower.dist.negated(), sides: vec![IntervalKind::Upper], ..lower.clone() };
    let lo = run_coverage_experiment(&lower, RunOptions::default()).unwrap();
    let up = run_coverage_experiment(&upper, RunOptions::default()).unwrap();
    let mut mirror = lo.rows.len() == up.rows.len();
    for (a, b) in lo.rows.iter().zip(&up.rows) {
        mirror &= a.order == b.order && a.event == b.event && a.count == b.count;
    }

    let mut two = plan(
        DistributionSpec::parse("gaussian").unwrap(),
        100,
        0.02,
        vec![Unadjusted, First, Second],
        vec![IntervalKind::TwoSided],
        1_000_000,
    );
    two.alpha2 = Some(ScheduleExpr::Constant(0.01));
    let rep = run_coverage_experiment(&two, RunOptions::default()).unwrap();
    let mut calibrated = true;
    let mut parts = Vec::new();
    for s in [Unadjusted, First, Second] {
        let row = rep.find(100, IntervalKind::TwoSided, s, Event::NonCoverTrue, None).unwrap();
        let zscore = (row.empirical_prob - 0.03) / row.mc_standard_error;
        calibrated &= zscore.abs() <= 4.0;
        parts.push(format!("s={s} ratio {:.4} ({zscore:+.2} se)", row.ratio_to_nominal));
    }
    verdict(
        mirror && calibrated,
        format!(
            "mirror counts identical: {mirror}; gaussian two-sided vs alpha1+alpha2 = 0.03: {}; {:.1} s",
            parts.join(", "),
            secs(start.elapsed())
        ),
    )
}

fn proposition1() -> Verdict {
    let start = Instant::now();
    let spec: CumulantSpec = "poisson".parse().unwrap();
    let m0 = expfam::moments_from_cumulant(&spec, 0.0).unwrap();
    let law = expfam::shifted_sample_law(&spec, 0.0, m0.mu).unwrap();
    let pl = plan(law, 400, 0.01, vec![First], vec![IntervalKind::Upper], 2_000_000);
    let rep = run_power_experiment(&pl, RunOptions::default()).unwrap();
    let row = rep
        .find(400, IntervalKind::Upper, First, Event::RejectUnderNull, Some(TestRule::AdjustedQuantile))
        .unwrap();
    let rate_ok = within(row.ratio_to_nominal, 0.90, 1.10);

    let families: Vec<CumulantSpec> =
        ["gaussian", "poisson", "bernoulli", "gamma(1)", "gamma(4)"].iter().map(|s| s.parse().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let spec = families[rng.random_range(0..families.len())];
        let theta = match spec.family() {
            expfam::Family::Gamma { .. } => -rng.random_range(0.05..5.0),
            _ => rng.random_range(-4.0..4.0),
        };
        let n = rng.random_range(1..1_000_000u64);
        let alpha = p(10f64.powf(rng.random_range(-12.0..-0.5)));
        let m = expfam::moments_from_cumulant(&spec, theta).unwrap();
        let lhs = expfam::proposition_threshold(&spec, theta, n, alpha).unwrap();
        let rhs = adjustment::adjusted_quantile(alpha, n, &m, First, Sign::Plus).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    verdict(
        rate_ok && worst <= 1e-15,
        format!(
            "poisson rejection ratio {:.4} ± {:.4}; threshold identity max |diff| {worst:e} over 1000 configs; {:.1} s",
            row.ratio_to_nominal,
            row.ratio_standard_error(),
            secs(start.elapsed())
        ),
    )
}

fn tail_equivalence() -> Verdict {
    let start = Instant::now();
    let d = exponential();
    let m = d.moments();
    let est = estimate_upper_tail(&d, 100, 2.5, 10_000_000, SEED, RunOptions::default()).unwrap();
    let cramer = adjustment::cramer_tail(2.5, 100, &m, Second, Sign::Plus).unwrap();
    let mills = gaussian::mills_tail(2.5).unwrap();
    let near_cramer = (est.probability / cramer - 1.0).abs() <= 0.10;
    let far_from_mills = (est.probability / mills - 1.0).abs() > 0.10;
    let elapsed = start.elapsed();
    verdict(
        near_cramer && far_from_mills && elapsed <= Duration::from_secs(300),
        format!(
            "P̂(T > 2.5) = {:.6} ± {:.6}; cramer_tail = {cramer:.6} (ratio {:.4}); mills_tail = {mills:.6} \
             (ratio {:.4}); {:.1} s",
            est.probability,
            est.standard_error,
            est.probability / cramer,
            est.probability / mills,
            secs(elapsed)
        ),
    )
}

fn determinism(single: &SimulationReport) -> Verdict {
    let start = Instant::now();
    let pl = theorem1_plan();
    let reference = single.to_csv();
    let mut ok = true;
    for w in [4, 8] {
        let rep = run_coverage_experiment(&pl, RunOptions::with_workers(w)).unwrap();
        ok &= rep.to_csv() == reference && rep.header_json() == single.header_json();
    }
    verdict(ok, format!("CSV at 1, 4 and 8 workers byte-identical: {ok}; {:.1} s", secs(start.elapsed())))
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let outcome = panic::catch_unwind(AssertUnwindSafe(f));
    let (pass, detail) = match outcome {
        Ok(v) => (v.pass, v.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!("criterion {id:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |id: usize| filter.is_empty() || filter.iter().any(|f| f == &id.to_string());

    let mut results = Vec::new();
    let mut record = |id: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        if selected(id) {
            results.push((id, run(id, name, f)));
        }
    };
    record(1, "quantile fidelity", &mut quantile_fidelity);
    record(2, "large-quantile rate", &mut large_quantile_rate);
    record(3, "coefficient duality", &mut coefficient_duality);

    let mut theorem1_report = None;
    if selected(4) || selected(10) {
        let start = Instant::now();
        let rep = run_coverage_experiment(&theorem1_plan(), RunOptions::default());
        theorem1_report = Some((rep, start.elapsed()));
    }
    record(4, "first kind coverage (exponential, n = 400)", &mut || match &theorem1_report {
        Some((Ok(rep), elapsed)) => theorem1(rep, *elapsed),
        Some((Err(e), _)) => verdict(false, format!("experiment failed: {e}")),
        None => unreachable!(),
    });
    record(5, "second kind coverage (exponential, n = 1600)", &mut theorem2);
    record(6, "adjusted-statistic test", &mut theorem4);
    record(7, "lower-interval mirror and two-sided level", &mut mirror_and_two_sided);
    record(8, "exponential-family threshold (Poisson)", &mut proposition1);
    record(9, "Cramér tail equivalence", &mut tail_equivalence);
    record(10, "worker-count determinism", &mut || match &theorem1_report {
        Some((Ok(rep), _)) => determinism(rep),
        Some((Err(e), _)) => verdict(false, format!("experiment failed: {e}")),
        None => unreachable!(),
    });

    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    println!("acceptance: {} passed, {} failed {:?}", results.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
