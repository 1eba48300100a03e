//! Explicit Wasserstein-1 bounds for the normal approximation of maximum
//! likelihood estimators computed from locally dependent data.
//!
//! The crate is organised bottom-up:
//!
//! * [`dependence`] builds the interval dependency neighbourhoods of a
//!   `2m`-dependent family of score contributions and evaluates the
//!   moment-relaxed Stein terms, plus Monte Carlo estimates of the raw
//!   local-dependence bound.
//! * [`bound`] assembles the full six-term MLE bound and its i.i.d.
//!   specialisation.
//! * [`blocksum`] is a complete worked model: overlapping Gaussian block sums
//!   forming a 1-dependent sequence, with closed-form MLE, variances, score
//!   moments, the printed per-case closed forms and a reproducible simulator.
//! * [`wasserstein`] provides the standard normal CDF/quantile, the exact
//!   distance between two normal laws and an exact-integration empirical
//!   distance to `N(0, 1)`.
//!
//! All numerical code is generic over the scalar through [`Real`]; the
//! `f64` aliases at the crate root are what most callers want.

pub mod blocksum;
pub mod bound;
pub mod dependence;
mod error;
mod matrix;
mod real;
pub mod rng;
pub mod wasserstein;

pub use error::{Error, Result};
pub use matrix::ReplicateMatrix;
pub use real::Real;

pub type ScoreMomentProfile = dependence::ScoreMomentProfile<f64>;
pub type QComponents = dependence::QComponents<f64>;
pub type LemmaTermEstimate = dependence::LemmaTermEstimate<f64>;
pub type TheoremInputs = bound::TheoremInputs<f64>;
pub type BoundBreakdown = bound::BoundBreakdown<f64>;
pub type BlockSumConfig = blocksum::BlockSumConfig<f64>;
pub type BlockSumClosedForms = blocksum::BlockSumClosedForms<f64>;
pub type NormalParams = wasserstein::NormalParams<f64>;
pub type SampleSet = wasserstein::SampleSet<f64>;
pub type PathMatrix = ReplicateMatrix<f64>;

pub use dependence::{IndexInterval, NeighborhoodSystem};
