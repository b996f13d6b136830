//! Feature selection with false discovery rate control using Gaussian
//! model-X knockoffs and a paired-input neural network.
//!
//! The pipeline is: [`knockoffs`] builds knockoff copies of the design,
//! [`net`] trains networks whose first layer pits each feature against its
//! knockoff, and [`filter`] turns the resulting importances into a selection
//! at a target FDR level. [`simgen`] reproduces the synthetic benchmarks and
//! [`io`] reads and writes the CSV/JSON artifacts.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod filter;
pub mod io;
pub mod knockoffs;
pub mod linalg;
pub mod net;
pub mod rng;
pub mod simgen;

pub use data::{DesignMatrix, ResponseVector};
pub use error::{Error, Result};
pub use filter::{evaluate, knockoff_statistic, select, threshold, EvalMetrics, Rule, SelectionReport};
pub use knockoffs::{
    equicorrelated_s, estimate_covariance, exchangeability_diagnostic, sample_knockoffs, AugmentedDesign,
    CovarianceEstimate, CovarianceMode, ExchangeabilityDiagnostic, KnockoffModel,
};
pub use net::{run_ensemble, train, Aggregation, Architecture, ImportancePair, PinkNetwork, TrainConfig};
pub use rng::Seed;
pub use simgen::{run_experiment, ExperimentReport, ResponseModel, SimConfig};
