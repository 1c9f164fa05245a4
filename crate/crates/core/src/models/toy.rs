use rand_distr::{Distribution, Normal};

use crate::engine::{LatentDatabase, PrivacyModel, RecordStatistic, SimRng, SummaryValue};
use crate::error::{Error, Result};

/// One confidential value `x ~ N(θ, σ²)` released as `s = x + N(0, ε⁻²)`,
/// flat prior on `θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyGaussianModel {
    epsilon: f64,
    sigma: f64,
}

impl ToyGaussianModel {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self { epsilon, sigma })
    }

    fn normal(&self, mean: f64) -> Result<Normal<f64>> {
        Normal::new(mean, self.sigma).map_err(|e| Error::Numeric(e.to_string()))
    }
}

impl PrivacyModel for ToyGaussianModel {
    fn npar(&self) -> usize {
        1
    }

    fn varnames(&self) -> Vec<String> {
        vec!["theta".into()]
    }

    fn posterior_step(&self, data: &LatentDatabase, _theta: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
        Ok(vec![self.normal(data.row(0)[0])?.sample(rng)])
    }

    fn sample_latent(&self, theta: &[f64], rng: &mut SimRng) -> Result<LatentDatabase> {
        LatentDatabase::new(1, 1, vec![self.normal(theta[0])?.sample(rng)])
    }

    fn propose_record(&self, theta: &[f64], rng: &mut SimRng, out: &mut [f64]) -> Result<()> {
        out[0] = self.normal(theta[0])?.sample(rng);
        Ok(())
    }

    fn record_statistic(&self, record: &[f64], _sdp: &SummaryValue, _index: usize, out: &mut RecordStatistic) -> Result<()> {
        out.set_dense((1, 1), &record[..1]);
        Ok(())
    }

    fn privacy_logdensity(&self, sdp: &SummaryValue, sx: &SummaryValue) -> Result<f64> {
        let d = sdp.as_slice()[0] - sx.as_slice()[0];
        let prec = self.epsilon * self.epsilon;
        Ok(0.5 * (prec / std::f64::consts::TAU).ln() - 0.5 * prec * d * d)
    }
}
