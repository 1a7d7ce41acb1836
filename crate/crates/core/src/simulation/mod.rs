//! Seeded Monte Carlo harness for coverage, test size/power and tail
//! experiments.

pub mod distribution;
pub mod engine;
pub mod plan;
pub mod report;
pub mod rng;

pub use distribution::{DistributionSpec, Law, Sampler};
pub use engine::{
    convergence_sweep, estimate_upper_tail, run_coverage_experiment, run_power_experiment, RunOptions, TailEstimate,
};
pub use plan::ExperimentPlan;
pub use report::{Event, ReportRow, SimulationReport};
