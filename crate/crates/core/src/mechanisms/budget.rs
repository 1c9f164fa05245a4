use crate::error::{Error, Result};
use crate::scalar::Real;

/// Privacy loss parameters. `rho` is set when the guarantee originates from
/// zero-concentrated DP and `epsilon` was derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget<F: Real> {
    pub epsilon: F,
    pub delta: F,
    pub rho: Option<F>,
}

impl<F: Real> PrivacyBudget<F> {
    pub fn pure(epsilon: F) -> Result<Self> {
        Self::approximate(epsilon, F::zero())
    }

    pub fn approximate(epsilon: F, delta: F) -> Result<Self> {
        if !(epsilon >= F::zero()) {
            return Err(Error::param("epsilon", format!("must be non-negative, got {epsilon}")));
        }
        if !(delta >= F::zero() && delta <= F::one()) {
            return Err(Error::param("delta", format!("must lie in [0, 1], got {delta}")));
        }
        Ok(Self {
            epsilon,
            delta,
            rho: None,
        })
    }

    /// `(epsilon, delta)` implied by `rho`-zCDP.
    pub fn from_zcdp(rho: F, delta: F) -> Result<Self> {
        let epsilon = zcdp_epsilon(rho, delta)?;
        Ok(Self {
            epsilon,
            delta,
            rho: Some(rho),
        })
    }
}

/// `rho`-zCDP implies `(rho + 2 sqrt(rho ln(1/delta)), delta)`-DP.
pub fn zcdp_epsilon<F: Real>(rho: F, delta: F) -> Result<F> {
    if !(rho > F::zero()) || !rho.is_finite() {
        return Err(Error::param("rho", format!("must be positive, got {rho}")));
    }
    if !(delta > F::zero() && delta < F::one()) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let log_inv_delta = -delta.ln();
    Ok(rho + F::lit(2.0) * (rho * log_inv_delta).sqrt())
}

/// Smallest discrete Gaussian scale whose zCDP guarantee converts to
/// `(epsilon, delta)`-DP for a statistic with the given L2 sensitivity.
pub fn sigma_for_approx_dp<F: Real>(l2_sensitivity: F, epsilon: F, delta: F) -> Result<F> {
    if !(l2_sensitivity > F::zero()) || !l2_sensitivity.is_finite() {
        return Err(Error::param("l2_sensitivity", format!("must be positive, got {l2_sensitivity}")));
    }
    if !(epsilon > F::zero()) || !epsilon.is_finite() {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(delta > F::zero() && delta < F::one()) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let l = -delta.ln();
    // sqrt(rho) = sqrt(l + eps) - sqrt(l), written without cancellation
    let sqrt_rho = epsilon / ((l + epsilon).sqrt() + l.sqrt());
    let rho = sqrt_rho * sqrt_rho;
    Ok(l2_sensitivity / (F::lit(2.0) * rho).sqrt())
}
