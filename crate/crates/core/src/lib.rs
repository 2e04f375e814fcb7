//! Simulation and estimation of detector-agnostic phase-space distributions
//! from multiplexed click statistics.
//!
//! The numerical core is generic over the scalar type through [`num::Real`];
//! the aliases at the crate root fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod coincidence;
pub mod detectors;
pub mod error;
pub mod estimator;
pub mod fockcore;
pub mod matrix;
pub mod num;
pub mod simulator;
pub mod special;

pub use error::{Error, Result};
pub use num::Real;

pub use coincidence::{CoincidenceCounts, OutcomeSpace};
pub use detectors::{DetectorModel, TesForm};
pub use fockcore::StateSpec;
pub use simulator::{ScanDataset, ScanMetadata, ScanSetting};

pub type FockDistribution = fockcore::FockDistribution<f64>;
pub type FrontendConfig = fockcore::FrontendConfig<f64>;
pub type ResponseMatrix = detectors::ResponseMatrix<f64>;
pub type ProbabilityTable = coincidence::ProbabilityTable<f64>;
pub type MultiplexConfig = simulator::MultiplexConfig<f64>;
pub type Imbalance = simulator::Imbalance<f64>;
pub type CoincidenceData = estimator::CoincidenceData<f64>;
pub type EstimateWithError = estimator::EstimateWithError<f64>;
pub type CoincidenceEigen = estimator::CoincidenceEigen<f64>;
pub type GMinScan = estimator::GMinScan<f64>;
pub type MultinomialMatrix = estimator::MultinomialMatrix<f64>;
pub type RadialCurve = analysis::RadialCurve<f64>;
pub type GaussPolyModel = analysis::GaussPolyModel<f64>;
pub type FitResult = analysis::FitResult<f64>;
pub type OptimalZ = analysis::OptimalZ<f64>;
pub type Complex = num_complex::Complex<f64>;
