//! Noise mechanisms: mass/density functions, exact samplers and budget conversions.
//!
//! All densities are evaluated in log space. Samplers take an explicit random
//! stream and hold no shared mutable state; the only global state is the
//! discrete Gaussian normalizer cache, which is safe for concurrent readers.

mod budget;
mod discrete_gaussian;
mod discrete_laplace;
mod laplace;
mod randomized_response;

pub use budget::{sigma_for_approx_dp, zcdp_epsilon, PrivacyBudget};
pub use discrete_gaussian::{ddnorm, rdnorm, DiscreteGaussian};
pub use discrete_laplace::{ddlaplace, rdlaplace, DiscreteLaplace};
pub use laplace::{laplace_logdensity, laplace_mechanism, Laplace};
pub use randomized_response::{randomized_response, rr_loglik, RandomizedResponse};
