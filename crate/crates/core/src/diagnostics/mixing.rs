use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_positive<F: Real>(name: &'static str, v: F) -> Result<()> {
    if v > F::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// `γ = 1 − σ² / (σ² + ε⁻²)` for the Gaussian toy model.
pub fn fraction_missing_info<F: Real>(epsilon: F, sigma: F) -> Result<F> {
    check_positive("epsilon", epsilon)?;
    check_positive("sigma", sigma)?;
    let noise = (epsilon * epsilon).recip();
    let s2 = sigma * sigma;
    Ok(noise / (s2 + noise))
}

/// Two-block Gibbs sampler for `s = x + N(0, ε⁻²)`, `x ~ N(θ, σ²)`, flat
/// prior on `θ`, started at `θ = s`. Returns the `θ` series.
pub fn toy_model_chain<F: Real, R: Rng + ?Sized>(epsilon: F, sigma: F, s: F, niter: usize, rng: &mut R) -> Result<Vec<F>> {
    check_positive("epsilon", epsilon)?;
    check_positive("sigma", sigma)?;
    if niter == 0 {
        return Err(Error::param("niter", "must be at least 1"));
    }
    if !s.is_finite() {
        return Err(Error::param("s", "must be finite"));
    }
    let (e, sg, s) = (epsilon.as_f64(), sigma.as_f64(), s.as_f64());
    let noise_prec = e * e;
    let prior_prec = 1.0 / (sg * sg);
    let tau = (noise_prec + prior_prec).recip().sqrt();
    let mut theta = s;
    let mut out = Vec::with_capacity(niter);
    for _ in 0..niter {
        let mu = (s * noise_prec + theta * prior_prec) / (noise_prec + prior_prec);
        let z: f64 = StandardNormal.sample(rng);
        let x = mu + tau * z;
        let z: f64 = StandardNormal.sample(rng);
        theta = x + sg * z;
        out.push(F::lit(theta));
    }
    Ok(out)
}

/// Sample autocorrelation at lag 1; zero for a constant series.
pub fn lag1_autocorrelation<F: Real>(series: &[F]) -> Result<F> {
    if series.len() < 3 {
        return Err(Error::Input(format!("series has {} values, need at least 3", series.len())));
    }
    let x: Vec<f64> = series.iter().map(|v| v.as_f64()).collect();
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if denom == 0.0 {
        return Ok(F::zero());
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    Ok(F::lit(num / denom))
}
