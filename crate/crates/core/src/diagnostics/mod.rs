//! Posterior summaries, split-chain convergence diagnostics and the
//! missing-information analysis of the two-block Gibbs sampler.

mod convergence;
mod mixing;
mod summary;

pub use convergence::{ess_bulk, ess_tail, rank_normalize, split_rhat};
pub use mixing::{fraction_missing_info, lag1_autocorrelation, toy_model_chain};
pub use summary::{mad, median, quantile, sd, summarize, summarize_chains, SummaryRow};
