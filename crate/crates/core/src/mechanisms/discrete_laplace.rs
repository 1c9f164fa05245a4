use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Discrete Laplace on the integers:
/// `P[X = x] = (e^{1/t} - 1)/(e^{1/t} + 1) · e^{-|x|/t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteLaplace<F: Real> {
    t: F,
    log_norm: F,
}

impl<F: Real> DiscreteLaplace<F> {
    pub fn new(t: F) -> Result<Self> {
        if !(t > F::zero()) || !t.is_finite() {
            return Err(Error::param("t", format!("must be positive and finite, got {t}")));
        }
        // (e^a - 1)/(e^a + 1) = tanh(a/2)
        let log_norm = (F::one() / (F::lit(2.0) * t)).tanh().ln();
        Ok(Self { t, log_norm })
    }

    pub fn scale(&self) -> F {
        self.t
    }

    #[inline]
    pub fn ln_pmf(&self, x: F) -> F {
        self.log_norm - x.abs() / self.t
    }

    pub fn pmf(&self, x: F) -> F {
        self.ln_pmf(x).exp()
    }

    /// Difference of two i.i.d. geometric draws with success probability `1 - e^{-1/t}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        sample_two_sided_geometric((-1.0 / self.t.as_f64()).exp(), rng)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<i64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

/// Draws `G1 - G2` with `P[G = k] = (1 - q) q^k`, giving mass ∝ `q^{|x|}`.
pub(crate) fn sample_two_sided_geometric<R: Rng + ?Sized>(q: f64, rng: &mut R) -> i64 {
    let geom = Geometric::new(1.0 - q).expect("success probability in (0, 1]");
    let a = geom.sample(rng) as i64;
    let b = geom.sample(rng) as i64;
    a - b
}

pub fn ddlaplace<F: Real>(x: F, t: F, log: bool) -> Result<F> {
    let d = DiscreteLaplace::new(t)?;
    Ok(if log { d.ln_pmf(x) } else { d.pmf(x) })
}

pub fn rdlaplace<F: Real, R: Rng + ?Sized>(count: usize, t: F, rng: &mut R) -> Result<Vec<i64>> {
    Ok(DiscreteLaplace::new(t)?.sample_n(count, rng))
}
