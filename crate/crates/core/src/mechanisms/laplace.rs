use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Continuous Laplace distribution with density `(1/2b) exp(-|u - loc| / b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Laplace<F: Real> {
    location: F,
    scale: F,
}

impl<F: Real> Laplace<F> {
    pub fn new(location: F, scale: F) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::param("location", format!("must be finite, got {location}")));
        }
        if !(scale > F::zero()) || !scale.is_finite() {
            return Err(Error::param("scale", format!("must be positive and finite, got {scale}")));
        }
        Ok(Self { location, scale })
    }

    pub fn location(&self) -> F {
        self.location
    }

    pub fn scale(&self) -> F {
        self.scale
    }

    #[inline]
    pub fn ln_pdf(&self, u: F) -> F {
        -(F::lit(2.0) * self.scale).ln() - (u - self.location).abs() / self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        let magnitude: f64 = Exp1.sample(rng);
        let signed = if rng.random::<bool>() { magnitude } else { -magnitude };
        self.location + self.scale * F::lit(signed)
    }
}

pub fn laplace_logdensity<F: Real>(u: F, location: F, scale: F) -> Result<F> {
    Ok(Laplace::new(location, scale)?.ln_pdf(u))
}

/// Releases `s + u` with `u` i.i.d. `Laplace(0, sensitivity / epsilon)`.
pub fn laplace_mechanism<F: Real, R: Rng + ?Sized>(
    s: &[F],
    sensitivity: F,
    epsilon: F,
    rng: &mut R,
) -> Result<Vec<F>> {
    if !(sensitivity > F::zero()) || !sensitivity.is_finite() {
        return Err(Error::param("sensitivity", format!("must be positive, got {sensitivity}")));
    }
    if !(epsilon > F::zero()) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let scale = sensitivity / epsilon;
    if !(scale > F::zero()) {
        return Err(Error::param("epsilon", "noise scale sensitivity/epsilon underflows to zero"));
    }
    let noise = Laplace::new(F::zero(), scale)?;
    Ok(s.iter().map(|&v| v + noise.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mode_and_offset_values() {
        assert!((laplace_logdensity(0.0, 0.0, 1.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let v = laplace_logdensity(1.5, 0.0, 1.5).unwrap();
        assert!((v - ((1.0f64 / 3.0).ln() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn integrates_to_one() {
        // composite Simpson over [-50b, 50b], split at the kink
        let b = 0.8;
        let simpson = |a: f64, c: f64, n: usize| {
            let h = (c - a) / n as f64;
            let f = |x: f64| laplace_logdensity(x, 0.0, b).unwrap().exp();
            let mut s = f(a) + f(c);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let total = simpson(-50.0 * b, 0.0, 20_000) + simpson(0.0, 50.0 * b, 20_000);
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn paper_example_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = laplace_mechanism(&[0.0; 4], 15.0, 10.0, &mut rng).unwrap();
        assert_eq!(noisy.len(), 4);
        assert_eq!(15.0f64 / 10.0, 1.5);
    }

    #[test]
    fn vanishing_scale_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = [1.0f64, -2.0, 3.5];
        let out = laplace_mechanism(&s, 1e-12, 1.0, &mut rng).unwrap();
        for (a, b) in s.iter().zip(&out) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(laplace_mechanism(&[0.0], 0.0, 1.0, &mut rng).is_err());
        assert!(laplace_mechanism(&[0.0], 1.0, -1.0, &mut rng).is_err());
        assert!(laplace_logdensity(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn noise_variance_is_two_b_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let out = laplace_mechanism(&vec![0.0; n], 1.0, 1.0, &mut rng).unwrap();
        let mean = out.iter().sum::<f64>() / n as f64;
        let var = out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 2.0).abs() < 0.02, "{var}");
    }
}
