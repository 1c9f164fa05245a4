use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-bit randomized response: each bit is reported unchanged with
/// probability `keep_prob` and flipped otherwise.
///
/// The two-fair-coin survey scheme (keep on heads, otherwise answer with a
/// second coin) leaves a bit unchanged with probability 3/4, see
/// [`RandomizedResponse::two_coin`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomizedResponse<F: Real> {
    keep_prob: F,
}

impl<F: Real> RandomizedResponse<F> {
    /// `keep_prob` must lie in `(0, 1]`; `1` is the degenerate no-noise release.
    pub fn new(keep_prob: F) -> Result<Self> {
        if !(keep_prob > F::zero() && keep_prob <= F::one()) {
            return Err(Error::param("keep_prob", format!("must lie in (0, 1], got {keep_prob}")));
        }
        Ok(Self { keep_prob })
    }

    pub fn two_coin() -> Self {
        Self {
            keep_prob: F::lit(0.75),
        }
    }

    pub fn keep_prob(&self) -> F {
        self.keep_prob
    }

    /// `(ln keep_prob, ln(1 - keep_prob))`
    pub fn log_probs(&self) -> (F, F) {
        (self.keep_prob.ln(), (F::one() - self.keep_prob).ln())
    }

    pub fn apply<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Result<Vec<u8>> {
        let keep = self.keep_prob.as_f64();
        bits.iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 | 1 => Ok(if rng.random::<f64>() < keep { b } else { 1 - b }),
                _ => Err(Error::Input(format!("entry {i} is {b}, expected 0 or 1"))),
            })
            .collect()
    }

    /// `matches · ln(keep) + mismatches · ln(1 - keep)`; a zero count
    /// contributes nothing even when its log-probability is `-∞`.
    pub fn loglik(&self, sdp_bits: &[F], x_bits: &[F]) -> Result<F> {
        if sdp_bits.len() != x_bits.len() {
            return Err(Error::Input(format!(
                "length mismatch: released {} bits, database {} bits",
                sdp_bits.len(),
                x_bits.len()
            )));
        }
        let mut matches = 0usize;
        for (i, (&a, &b)) in sdp_bits.iter().zip(x_bits).enumerate() {
            if !is_bit(a) || !is_bit(b) {
                return Err(Error::Input(format!("entry {i} is not binary")));
            }
            if a == b {
                matches += 1;
            }
        }
        let mismatches = sdp_bits.len() - matches;
        let (lk, lf) = self.log_probs();
        let mut ll = F::zero();
        if matches > 0 {
            ll = ll + F::from_usize_lossy(matches) * lk;
        }
        if mismatches > 0 {
            ll = ll + F::from_usize_lossy(mismatches) * lf;
        }
        Ok(ll)
    }
}

fn is_bit<F: Real>(v: F) -> bool {
    v == F::zero() || v == F::one()
}

pub fn randomized_response<F: Real, R: Rng + ?Sized>(
    bits: &[u8],
    params: &RandomizedResponse<F>,
    rng: &mut R,
) -> Result<Vec<u8>> {
    params.apply(bits, rng)
}

pub fn rr_loglik<F: Real>(sdp_bits: &[F], x_bits: &[F], params: &RandomizedResponse<F>) -> Result<F> {
    params.loglik(sdp_bits, x_bits)
}
