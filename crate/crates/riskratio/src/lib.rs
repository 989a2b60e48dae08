//! Confidence intervals for the risk ratio of two success rates estimated
//! from cluster-correlated binary data, plus a Monte Carlo harness that
//! scores each interval method by coverage probability, expected width, and
//! interval location.
//!
//! Clustered designs (litters, clinics, trials pooled over studies) inflate
//! the variance of a pooled proportion by a design effect driven by the
//! intraclass correlation. This crate implements 17 two-sided interval
//! procedures for the ratio of two such proportions:
//!
//! * `HB1` - a hybrid (square-and-add) interval recovered from per-group
//!   Wilson score intervals with an ANOVA ICC correction;
//! * `MK*`, `IH*`, `KA*`, `DK*`, `FB*` - modified Katz log, inverse
//!   hyperbolic sine, score, delta-Katz, and Fieller-Bailey families, each
//!   evaluated at three effective sample sizes (`*1` equal-weight, `*2`
//!   optimal-weight, `*3` ratio-estimator variance);
//! * `MR3` - the Fieller interval on ratio-estimator variances, kept as the
//!   baseline; its nonexistence and width anomalies are observable outcomes.
//!
//! # Quick start
//!
//! ```
//! use riskratio::data::{GroupData, TwoGroupStudy};
//! use riskratio::methods::compute_all;
//!
//! let treatment = GroupData::from_pairs(&[(12, 5), (9, 4), (15, 7), (8, 2)]).unwrap();
//! let control = GroupData::from_pairs(&[(10, 2), (14, 3), (11, 2), (9, 1)]).unwrap();
//! let study = TwoGroupStudy::new(treatment, control);
//! for result in compute_all(&study, 0.05) {
//!     if let Some((lower, upper)) = result.limits() {
//!         println!("{}: ({lower:.3}, {upper:.3})", result.method);
//!     } else {
//!         println!("{}: does not exist", result.method);
//!     }
//! }
//! ```
//!
//! The `examples/` directory has one runnable program per capability:
//! interval computation, the bundled demonstration datasets, single-cell
//! coverage scenarios, simulation grids, appropriateness checks, and the
//! beta-binomial sampler. A thin `riskratio` binary exposes the same
//! capabilities as `ci`, `simulate`, and `appropriateness` subcommands.

pub mod data;
pub mod dist;
pub mod estimators;
pub mod io;
pub mod methods;
pub mod report;
pub mod root;
pub mod simulation;

pub use data::{
    ClusterRecord, DataError, EffectiveSize, GroupData, GroupSummary, IntervalEstimate,
    IntervalFlags, IntervalResult, Method, MethodMetrics, NonexistenceReason, ScenarioMetrics,
    ScenarioSpec, TwoGroupStudy, VarianceKind,
};
pub use methods::{compute_all, compute_all_with, MethodOptions, MethodParams};
pub use simulation::{
    appropriateness_check, run_grid, run_scenario, run_scenario_with, AppropriatenessSpec,
    GridSummary, SimError, SimOptions,
};
