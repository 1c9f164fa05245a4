//! Data-augmentation sampler for the private posterior `p(θ | s_dp)`.
//!
//! Each iteration draws `θ ~ p(θ | x)` from the model's confidential-data
//! posterior, then refreshes every latent record with a Metropolis step whose
//! acceptance ratio only involves the mechanism density. Record additivity
//! lets each proposal be scored from a running total patched in O(1).

mod model;
mod sampler;
mod types;

pub use model::{CustomModel, PrivacyModel, SimRng};
pub use sampler::{
    chain_rng, mh_accept_logratio, recompute_statistic, sample_chain, sample_private_posterior,
    sample_private_posterior_with, sweep_latent, ChainDraws, ProgressHook, RunOptions, COHERENCE_TOLERANCE,
};
pub use types::{
    update_statistic, DrawsMatrix, LatentDatabase, RecordStatistic, SamplerConfig, SamplerOutput, SummaryValue,
};
