//! Exact Bayesian inference from differentially private summary statistics.
//!
//! The sampler alternates a confidential-data posterior draw with a
//! record-by-record Metropolis update of a latent database whose proposals
//! come from the data model itself, so the privacy mechanism density is the
//! only term in the acceptance ratio. Because the mechanism depends on the
//! database through a sum of per-record statistics, each proposal is scored
//! after an O(1) update of the running total.
//!
//! * [`mechanisms`]: discrete Gaussian, discrete Laplace, Laplace, randomized
//!   response and privacy-budget conversions.
//! * [`engine`]: the [`PrivacyModel`] trait and the sampler.
//! * [`models`]: contingency-table and regression models with naive baselines.
//! * [`diagnostics`]: summary tables, split R-hat, ESS and mixing analysis.
//! * [`oracle`]: brute-force grid posteriors for small instances.
//!
//! Density and diagnostic code is generic over [`Real`]; the aliases below
//! fix the scalar to `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod engine;
mod error;
pub mod mechanisms;
pub mod models;
pub mod oracle;
mod scalar;

pub use engine::{
    sample_private_posterior, sample_private_posterior_with, LatentDatabase, PrivacyModel, RunOptions, SamplerConfig,
    SamplerOutput, SummaryValue,
};
pub use error::{Error, Result};
pub use scalar::Real;

pub type DiscreteGaussian = mechanisms::DiscreteGaussian<f64>;
pub type DiscreteLaplace = mechanisms::DiscreteLaplace<f64>;
pub type Laplace = mechanisms::Laplace<f64>;
pub type RandomizedResponse = mechanisms::RandomizedResponse<f64>;
pub type PrivacyBudget = mechanisms::PrivacyBudget<f64>;
pub type Draws = engine::DrawsMatrix<f64>;
pub type SummaryRow = diagnostics::SummaryRow<f64>;
