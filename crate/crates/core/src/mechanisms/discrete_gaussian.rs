use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rand::Rng;

use super::discrete_laplace::sample_two_sided_geometric;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Terms are summed outward from the mode until they drop below this
/// fraction of the running sum.
const TAIL_CUTOFF: f64 = 1e-17;
const CACHE_LIMIT: usize = 4096;

/// Discrete Gaussian on the integers: `P[X = x] ∝ exp(-(x - mu)² / 2σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteGaussian<F: Real> {
    mu: F,
    sigma: F,
    log_norm: F,
}

impl<F: Real> DiscreteGaussian<F> {
    pub fn new(mu: F, sigma: F) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::param("mu", format!("must be finite, got {mu}")));
        }
        if !(sigma > F::zero()) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be positive and finite, got {sigma}")));
        }
        let log_norm = F::lit(cached_log_normalizer(mu.as_f64(), sigma.as_f64()));
        Ok(Self { mu, sigma, log_norm })
    }

    pub fn mu(&self) -> F {
        self.mu
    }

    pub fn sigma(&self) -> F {
        self.sigma
    }

    /// `ln Σ_{y ∈ ℤ} exp(-(y - mu)² / 2σ²)`.
    pub fn log_normalizer(&self) -> F {
        self.log_norm
    }

    /// Log of the numerator only; differences of this are exact log pmf ratios.
    #[inline]
    pub fn ln_unnormalized(&self, x: F) -> F {
        let d = x - self.mu;
        -(d * d) / (F::lit(2.0) * self.sigma * self.sigma)
    }

    #[inline]
    pub fn ln_pmf(&self, x: F) -> F {
        self.ln_unnormalized(x) - self.log_norm
    }

    pub fn pmf(&self, x: F) -> F {
        self.ln_pmf(x).exp()
    }

    /// One exact draw by rejection from a discrete Laplace proposal centred on
    /// the integer nearest to `mu`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let mu = self.mu.as_f64();
        let sigma = self.sigma.as_f64();
        let center = mu.round();
        let t = sigma.floor() + 1.0;
        let q = (-1.0 / t).exp();
        let two_s2 = 2.0 * sigma * sigma;
        // sup over reals of the log target/proposal ratio
        let bound = sigma * sigma / (2.0 * t * t) + (mu - center).abs() / t;
        loop {
            let offset = sample_two_sided_geometric(q, rng);
            let y = center + offset as f64;
            let log_ratio = -(y - mu) * (y - mu) / two_s2 + (offset as f64).abs() / t - bound;
            let u: f64 = rng.random();
            if u < log_ratio.exp() {
                return center as i64 + offset;
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<i64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

/// Discrete Gaussian mass at `x`. With `log_unnormalized` set, returns only
/// `-(x - mu)² / 2σ²`, skipping the normalizer.
pub fn ddnorm<F: Real>(x: F, mu: F, sigma: F, log_unnormalized: bool) -> Result<F> {
    if !x.is_finite() {
        return Err(Error::param("x", format!("must be finite, got {x}")));
    }
    let dist = DiscreteGaussian::new(mu, sigma)?;
    Ok(if log_unnormalized {
        dist.ln_unnormalized(x)
    } else {
        dist.pmf(x)
    })
}

pub fn rdnorm<F: Real, R: Rng + ?Sized>(count: usize, mu: F, sigma: F, rng: &mut R) -> Result<Vec<i64>> {
    Ok(DiscreteGaussian::new(mu, sigma)?.sample_n(count, rng))
}

fn normalizer_cache() -> &'static RwLock<HashMap<(u64, u64), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The normalizer depends on `mu` only through its fractional part.
fn cached_log_normalizer(mu: f64, sigma: f64) -> f64 {
    let frac = mu - mu.floor();
    let key = (frac.to_bits(), sigma.to_bits());
    if let Some(v) = normalizer_cache().read().unwrap().get(&key) {
        return *v;
    }
    let v = log_normalizer(frac, sigma);
    let mut cache = normalizer_cache().write().unwrap();
    if cache.len() >= CACHE_LIMIT {
        cache.clear();
    }
    cache.insert(key, v);
    v
}

/// Sums terms outward from the nearest integer, in units of the largest term.
fn log_normalizer(mu: f64, sigma: f64) -> f64 {
    let center = mu.round();
    let two_s2 = 2.0 * sigma * sigma;
    let log_term = |y: f64| -(y - mu) * (y - mu) / two_s2;
    let peak = log_term(center);
    let mut sum = 1.0;
    for dir in [1.0, -1.0] {
        let mut k = 1.0;
        loop {
            let term = (log_term(center + dir * k) - peak).exp();
            sum += term;
            if term < TAIL_CUTOFF * sum {
                break;
            }
            k += 1.0;
        }
    }
    peak + sum.ln()
}
