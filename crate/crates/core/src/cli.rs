//! `skewadj` command-line front end.
//!
//! Output is JSON by default and `key = value` lines with `--plain`. Exit
//! codes: 0 success, 2 usage or i/o error, 3 domain, regime or model error,
//! 4 when `simulate --strict` finds an under-powered report cell.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::adjustment::{self, AdjustmentOrder, MomentProfile, Sign};
use crate::error::{Error, Result};
use crate::expfam::{self, CumulantSpec};
use crate::gaussian::{self, Probability};
use crate::inference::{self, Side, TestRule};
use crate::regimes::{self, ErrorSchedule, OsipovOrder, ScheduleExpr};
use crate::simulation::{self, DistributionSpec, ExperimentPlan, RunOptions};

pub const EXIT_LOW_POWER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "skewadj", version, about = "Skewness-kurtosis adjusted intervals and Gauss tests for a mean")]
pub struct Cli {
    /// Print `key = value` lines instead of JSON.
    #[arg(long, global = true)]
    pub plain: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Standard normal quantiles, CDF and tail approximations.
    Quantile(QuantileArgs),
    /// Adjusted quantiles and statistics, their inverse and the Cramér tail.
    Adjust(AdjustArgs),
    /// Adjusted confidence interval for the mean.
    Ci(CiArgs),
    /// One-sided Gauss test of H0: mu <= mu0.
    Test(TestArgs),
    /// Modified local alternative.
    Alternative(AlternativeArgs),
    /// Osipov-type and Linnik diagnostics for an error schedule.
    Osipov(OsipovArgs),
    /// Exponential-family moments, test threshold and sample law.
    Expfam(ExpfamArgs),
    /// Run a Monte Carlo experiment from a plan file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "quantile_input")]
pub struct QuantileArgs {
    /// Upper tail mass; prints z_{1-alpha} and the large-quantile form.
    #[arg(long, group = "quantile_input")]
    pub alpha: Option<f64>,
    /// Lower probability; prints the quantile at p.
    #[arg(long, group = "quantile_input")]
    pub p: Option<f64>,
    /// Point; prints density, CDF, survival and Mills tail.
    #[arg(long, group = "quantile_input", allow_hyphen_values = true)]
    pub x: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub g1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub g2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

impl MomentArgs {
    fn profile(&self, mu: f64) -> Result<MomentProfile> {
        MomentProfile::new(mu, self.sigma, self.g1, self.g2)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "adjust_input")]
pub struct AdjustArgs {
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub moments: MomentArgs,
    /// Adjustment order 0, 1 or 2.
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Adjusted quantile z_{1-alpha}(s).
    #[arg(long, group = "adjust_input")]
    pub alpha: Option<f64>,
    /// Adjusted statistic T(s) at this standardized value.
    #[arg(long, group = "adjust_input", allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Inverse of the adjusted statistic at this value.
    #[arg(long, group = "adjust_input", allow_hyphen_values = true)]
    pub inverse: Option<f64>,
    /// Cramér tail f_{n,s}(x) at this point.
    #[arg(long, group = "adjust_input")]
    pub tail: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Upper,
    Lower,
    TwoSided,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub xbar: f64,
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub moments: MomentArgs,
    #[arg(long)]
    pub alpha: f64,
    /// Right-hand level of a two-sided interval (defaults to alpha).
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, value_enum, default_value_t = KindArg::Upper)]
    pub kind: KindArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    AdjustedQuantile,
    AdjustedStatistic,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub xbar: f64,
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub moments: MomentArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu0: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, value_enum, default_value_t = RuleArg::AdjustedQuantile)]
    pub rule: RuleArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Upper,
    Lower,
}

#[derive(Debug, Args)]
pub struct AlternativeArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub moments: MomentArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, value_enum, default_value_t = SideArg::Upper)]
    pub side: SideArg,
}

#[derive(Debug, Args)]
pub struct OsipovArgs {
    /// alpha(n): `c`, `c*n^-p`, `c/log(n)` or `boundary(g)`.
    #[arg(long)]
    pub schedule: String,
    /// beta(n); defaults to the alpha schedule.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub gamma: f64,
    /// Comma-separated increasing sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<u64>,
    /// Catalog distribution for the Linnik check.
    #[arg(long)]
    pub dist: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExpfamArgs {
    /// gaussian, poisson, bernoulli or gamma(k).
    #[arg(long)]
    pub family: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// With --alpha, also print the test threshold.
    #[arg(long, requires = "alpha")]
    pub n: Option<u64>,
    #[arg(long, requires = "n")]
    pub alpha: Option<f64>,
    /// Print the centered sample law shifted to this mean.
    #[arg(long, allow_hyphen_values = true)]
    pub target_mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Coverage,
    Power,
    Sweep,
    Tail,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Overrides the plan seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ExperimentArg::Coverage)]
    pub experiment: ExperimentArg,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write `<stem>.csv` and `<stem>.json` instead of printing the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 4 if any report cell expects fewer than 100 events.
    #[arg(long)]
    pub strict: bool,
    /// Tail point for `--experiment tail`.
    #[arg(long, default_value_t = 2.5)]
    pub x: f64,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Output {
    Json(Value),
    /// Pre-rendered text for both modes, with an exit code.
    Text { json: String, plain: String, code: i32 },
}

fn prob(v: f64, what: &str) -> Result<Probability> {
    Probability::new(v).map_err(|e| Error::Domain(format!("{what}: {e}")))
}

fn order(s: u8) -> Result<AdjustmentOrder> {
    AdjustmentOrder::try_from(s)
}

fn schedule(src: &str) -> Result<ScheduleExpr> {
    src.parse()
}

fn quantile(a: &QuantileArgs) -> Result<Value> {
    if let Some(alpha) = a.alpha {
        let p = prob(alpha, "alpha")?;
        let large = gaussian::large_quantile_approx(p);
        return Ok(json!({
            "alpha": alpha,
            "upper_quantile": gaussian::upper_quantile(p),
            "large_quantile_approx": large.as_ref().ok(),
            "large_quantile_note": large.err().map(|e| e.to_string()),
        }));
    }
    if let Some(pv) = a.p {
        let p = prob(pv, "p")?;
        return Ok(json!({ "p": pv, "quantile": gaussian::normal_quantile(p) }));
    }
    let x = a.x.expect("clap enforces one input");
    let mut out = json!({
        "x": x,
        "pdf": gaussian::normal_pdf(x),
        "cdf": gaussian::normal_cdf(x)?,
        "sf": gaussian::normal_sf(x)?,
    });
    if x > 0.0 {
        out["mills_tail"] = json!(gaussian::mills_tail(x)?);
        out["ln_mills_tail"] = json!(gaussian::ln_mills_tail(x)?);
    }
    Ok(out)
}

fn adjust(a: &AdjustArgs) -> Result<Value> {
    let m = a.moments.profile(0.0)?;
    let s = order(a.order)?;
    let sign = match a.sign {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
    };
    let dom = adjustment::monotone_domain(a.n, &m, s);
    let mut out = json!({
        "n": a.n, "order": s, "g1": m.g1, "g2": m.g2,
        "monotone_domain": { "lo": dom.lo, "hi": dom.hi },
    });
    if let Some(alpha) = a.alpha {
        let p = prob(alpha, "alpha")?;
        out["alpha"] = json!(alpha);
        out["sign"] = json!(format!("{:?}", a.sign).to_lowercase());
        out["gaussian_quantile"] = json!(gaussian::upper_quantile(p));
        out["adjusted_quantile"] = json!(adjustment::adjusted_quantile(p, a.n, &m, s, sign)?);
    } else if let Some(t) = a.t {
        out["t"] = json!(t);
        out["adjusted_statistic"] = json!(adjustment::adjusted_statistic(t, a.n, &m, s)?);
    } else if let Some(x) = a.inverse {
        out["x"] = json!(x);
        out["inverse_adjusted_statistic"] = json!(adjustment::inverse_adjusted_statistic(x, a.n, &m, s)?);
    } else {
        let x = a.tail.expect("clap enforces one input");
        let c = m.cramer_coefficients();
        out["x"] = json!(x);
        out["sign"] = json!(format!("{:?}", a.sign).to_lowercase());
        out["cramer_coefficients"] = json!({ "a0": c.a0, "a1": c.a1 });
        out["cramer_tail"] = json!(adjustment::cramer_tail(x, a.n, &m, s, sign)?);
        out["ln_cramer_tail"] = json!(adjustment::ln_cramer_tail(x, a.n, &m, s, sign)?);
        out["mills_tail"] = json!(gaussian::mills_tail(x)?);
    }
    Ok(out)
}

fn ci(a: &CiArgs) -> Result<Value> {
    let m = a.moments.profile(0.0)?;
    let s = order(a.order)?;
    let alpha = prob(a.alpha, "alpha")?;
    let interval = match a.kind {
        KindArg::Upper => inference::upper_interval(a.xbar, a.n, &m, alpha, s)?,
        KindArg::Lower => inference::lower_interval(a.xbar, a.n, &m, alpha, s)?,
        KindArg::TwoSided => {
            let alpha2 = prob(a.alpha2.unwrap_or(a.alpha), "alpha2")?;
            inference::two_sided_interval(a.xbar, a.n, &m, alpha, alpha2, s)?
        }
    };
    let mut out = serde_json::to_value(interval).expect("interval is plain data");
    out["width"] = json!(interval.width());
    Ok(out)
}

fn test(a: &TestArgs) -> Result<Value> {
    let m = a.moments.profile(a.mu0)?;
    let rule = match a.rule {
        RuleArg::AdjustedQuantile => TestRule::AdjustedQuantile,
        RuleArg::AdjustedStatistic => TestRule::AdjustedStatistic,
    };
    let d = inference::gauss_test(a.xbar, a.n, &m, a.mu0, prob(a.alpha, "alpha")?, order(a.order)?, rule)?;
    let mut out = serde_json::to_value(d).expect("decision is plain data");
    out["standardized"] = json!(inference::standardized(a.xbar, a.mu0, m.sigma, a.n));
    Ok(out)
}

fn alternative(a: &AlternativeArgs) -> Result<Value> {
    let m = a.moments.profile(a.mu)?;
    let side = match a.side {
        SideArg::Upper => Side::Upper,
        SideArg::Lower => Side::Lower,
    };
    let alt = inference::local_alternative(
        a.mu,
        a.n,
        &m,
        prob(a.alpha, "alpha")?,
        prob(a.beta, "beta")?,
        order(a.order)?,
        side,
    )?;
    Ok(serde_json::to_value(alt).expect("alternative is plain data"))
}

fn osipov(a: &OsipovArgs) -> Result<Value> {
    let alpha = schedule(&a.schedule)?;
    let beta = a.beta.as_deref().map(schedule).transpose()?.unwrap_or(alpha);
    let gamma = OsipovOrder::new(a.gamma)?;
    let sched = ErrorSchedule::new(alpha, beta);
    let verdict = regimes::osipov_diagnostic(&sched, gamma, &a.grid)?;
    let mut out = json!({
        "schedule": sched.description(),
        "gamma": a.gamma,
        "order": regimes::order_for_gamma(a.gamma)?,
        "linnik_exponent": regimes::linnik_exponent(a.gamma)?,
        "holds": verdict.holds,
        "monotone_tail": verdict.monotone_tail,
        "witness": verdict.witness,
    });
    if let Some(name) = &a.dist {
        let dist = DistributionSpec::parse(name)?;
        out["dist"] = json!(dist.name());
        out["tail_class"] = json!(dist.tail_class());
        out["linnik_holds"] = json!(regimes::linnik_holds(&dist, a.gamma)?);
    }
    Ok(out)
}

fn expfam_cmd(a: &ExpfamArgs) -> Result<Value> {
    let spec: CumulantSpec = a.family.parse()?;
    let m = expfam::moments_from_cumulant(&spec, a.theta)?;
    let mut out = json!({
        "family": spec,
        "theta": a.theta,
        "cumulant": spec.cumulant(a.theta),
        "moments": m,
    });
    if let (Some(n), Some(alpha)) = (a.n, a.alpha) {
        out["n"] = json!(n);
        out["alpha"] = json!(alpha);
        out["threshold"] = json!(expfam::proposition_threshold(&spec, a.theta, n, prob(alpha, "alpha")?)?);
    }
    if let Some(mu) = a.target_mu {
        let law = expfam::shifted_sample_law(&spec, a.theta, mu)?;
        out["sample_law"] = json!({ "distribution": law, "moments": law.moments() });
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<Output> {
    let mut plan = ExperimentPlan::from_path(&a.plan)?;
    if let Some(seed) = a.seed {
        plan.seed = seed;
    }
    let opts = RunOptions::with_workers(a.workers);
    if a.experiment == ExperimentArg::Tail {
        let n = plan.n_grid[0];
        let est = simulation::estimate_upper_tail(&plan.dist, n, a.x, plan.replications, plan.seed, opts)?;
        let m = plan.dist.moments();
        let mut out = serde_json::to_value(est).expect("estimate is plain data");
        for s in [AdjustmentOrder::First, AdjustmentOrder::Second] {
            out[format!("cramer_tail_order_{s}")] = json!(adjustment::cramer_tail(a.x, n, &m, s, Sign::Plus)?);
        }
        out["mills_tail"] = json!(gaussian::mills_tail(a.x)?);
        return Ok(Output::Json(out));
    }
    let report = match a.experiment {
        ExperimentArg::Coverage => simulation::run_coverage_experiment(&plan, opts)?,
        ExperimentArg::Power => simulation::run_power_experiment(&plan, opts)?,
        ExperimentArg::Sweep => simulation::convergence_sweep(
            &plan.dist,
            plan.gamma,
            &plan.schedule,
            &plan.n_grid,
            &plan.orders,
            plan.replications,
            plan.seed,
            opts,
        )?,
        ExperimentArg::Tail => unreachable!("handled above"),
    };
    let code = if a.strict && report.any_low_power() { EXIT_LOW_POWER } else { 0 };
    if let Some(stem) = &a.out {
        report.write(stem)?;
        let v = json!({
            "csv": stem.with_extension("csv"),
            "header": stem.with_extension("json"),
            "rows": report.rows.len(),
            "low_power": report.any_low_power(),
        });
        return Ok(Output::Text { json: pretty(&v), plain: render_plain(&v), code });
    }
    let json = serde_json::to_string_pretty(&report).expect("report is plain data");
    Ok(Output::Text { json, plain: report.to_csv(), code })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix} = {s}")),
        other => out.push(format!("{prefix} = {other}")),
    }
}

fn render_plain(v: &Value) -> String {
    let mut lines = Vec::new();
    flatten("", v, &mut lines);
    lines.join("\n")
}

fn run(cli: &Cli) -> Result<Output> {
    let v = match &cli.command {
        Command::Quantile(a) => quantile(a)?,
        Command::Adjust(a) => adjust(a)?,
        Command::Ci(a) => ci(a)?,
        Command::Test(a) => test(a)?,
        Command::Alternative(a) => alternative(a)?,
        Command::Osipov(a) => osipov(a)?,
        Command::Expfam(a) => expfam_cmd(a)?,
        Command::Simulate(a) => return simulate(a),
    };
    Ok(Output::Json(v))
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match run(&cli) {
        Ok(Output::Json(v)) => {
            let stdout = if cli.plain { render_plain(&v) } else { pretty(&v) };
            Outcome { code: 0, stdout: stdout + "\n", stderr: String::new() }
        }
        Ok(Output::Text { json, plain, code }) => {
            let mut stdout = if cli.plain { plain } else { json };
            if !stdout.ends_with('\n') {
                stdout.push('\n');
            }
            let stderr = if code == EXIT_LOW_POWER {
                "low power: some report cells expect fewer than 100 events\n".to_string()
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr }
        }
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("skewadj: {e}\n") },
    }
}

/// Library operation and an invocation that reaches it.
pub const DISPATCH_TABLE: &[(&str, &[&str])] = &[
    ("normal_quantile", &["quantile", "--p", "0.3"]),
    ("upper_quantile", &["quantile", "--alpha", "0.05"]),
    ("large_quantile_approx", &["quantile", "--alpha", "1e-8"]),
    ("normal_cdf", &["quantile", "--x", "-1.5"]),
    ("mills_tail", &["quantile", "--x", "3"]),
    ("adjusted_quantile", &["adjust", "--alpha", "0.05", "--n", "100", "--g1", "1.2", "--g2", "3.0", "--order", "2"]),
    ("adjusted_statistic", &["adjust", "--t", "2", "--n", "100", "--g1", "1.2", "--g2", "3.0"]),
    ("inverse_adjusted_statistic", &["adjust", "--inverse", "1.92", "--n", "100", "--g1", "1.2", "--g2", "3.0"]),
    ("cramer_tail", &["adjust", "--tail", "2.5", "--n", "100", "--g1", "2", "--g2", "6", "--order", "2"]),
    ("upper_interval", &["ci", "--xbar", "1", "--n", "100", "--g1", "1.2", "--alpha", "0.05"]),
    ("lower_interval", &["ci", "--xbar", "1", "--n", "100", "--g1", "1.2", "--alpha", "0.05", "--kind", "lower"]),
    (
        "two_sided_interval",
        &["ci", "--xbar", "1", "--n", "100", "--alpha", "0.025", "--alpha2", "0.01", "--kind", "two-sided"],
    ),
    ("gauss_test", &["test", "--xbar", "0.3", "--n", "100", "--g1", "1.2", "--alpha", "0.05"]),
    ("local_alternative", &["alternative", "--n", "100", "--g1", "1.2", "--alpha", "0.05", "--beta", "0.1"]),
    ("osipov_diagnostic", &["osipov", "--schedule", "0.05", "--gamma", "0.25", "--grid", "100,1000,10000,100000"]),
    ("order_for_gamma", &["osipov", "--schedule", "0.05", "--gamma", "0.3", "--grid", "10,20,30,40"]),
    ("linnik_holds", &["osipov", "--schedule", "0.05", "--gamma", "0.25", "--grid", "10,20,30,40", "--dist", "exponential"]),
    ("moments_from_cumulant", &["expfam", "--family", "poisson", "--theta", "0"]),
    ("proposition_threshold", &["expfam", "--family", "poisson", "--theta", "0", "--n", "100", "--alpha", "0.05"]),
    ("shifted_sample_law", &["expfam", "--family", "gamma(2)", "--theta", "-1", "--target-mu", "0"]),
];

/// Operations reached only through `simulate`, which needs a plan file.
pub const SIMULATE_OPERATIONS: &[(&str, &str)] = &[
    ("run_coverage_experiment", "coverage"),
    ("run_power_experiment", "power"),
    ("convergence_sweep", "sweep"),
    ("estimate_upper_tail", "tail"),
];
