//! Skewness-kurtosis adjusted confidence estimators and Gauss tests for the
//! mean of an i.i.d. shift family with known higher moments.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian`]: standard normal CDF, quantile and tail approximations.
//! * [`adjustment`]: first/second kind adjusted quantiles and statistics,
//!   the monotone inverse of the adjusted statistic and the Cramér tail
//!   comparator.
//! * [`regimes`]: Osipov-type admissibility diagnostics for error schedules,
//!   the order mapping and the Linnik tail catalog.
//! * [`inference`]: confidence intervals, modified local alternatives and
//!   test decisions.
//! * [`expfam`]: exponential-family moments from the cumulant function.
//! * [`simulation`]: a seeded, worker-count independent Monte Carlo harness.
//! * [`cli`]: the `skewadj` command-line dispatcher.

pub mod adjustment;
pub mod cli;
pub mod error;
pub mod expfam;
pub mod gaussian;
pub mod inference;
pub mod regimes;
pub mod simulation;

pub use adjustment::{AdjustmentOrder, CramerCoefficients, MomentProfile, Sign};
pub use error::{Error, Result};
pub use gaussian::Probability;
