use crate::error::Result;

use super::types::{LatentDatabase, RecordStatistic, SummaryValue};

/// Random stream handed to model callbacks. Each chain owns one.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// A Bayesian model extended with a record-additive privacy mechanism.
///
/// The mechanism density must depend on the latent database only through
/// `Σ_i t_i(x_i, s_dp)`, where `t_i` is [`record_statistic`](Self::record_statistic).
/// Implementations must be callable from several chains at once.
pub trait PrivacyModel: Sync {
    /// Dimension of the parameter vector.
    fn npar(&self) -> usize;

    fn varnames(&self) -> Vec<String> {
        (1..=self.npar()).map(|i| format!("theta{i}")).collect()
    }

    /// One draw from the confidential-data posterior `p(θ | x)`. `theta` is
    /// the current state, usable as a starting point by inner samplers.
    fn posterior_step(&self, data: &LatentDatabase, theta: &[f64], rng: &mut SimRng) -> Result<Vec<f64>>;

    /// A full database `x ~ f(· | θ)`. Its shape must not depend on `theta`.
    fn sample_latent(&self, theta: &[f64], rng: &mut SimRng) -> Result<LatentDatabase>;

    /// A single record `x_i* ~ f(· | θ)`, written into `out`.
    fn propose_record(&self, theta: &[f64], rng: &mut SimRng, out: &mut [f64]) -> Result<()>;

    /// `t_i(x_i, s_dp)`, written into `out`. The shape must match `sdp` for every `index`.
    fn record_statistic(
        &self,
        record: &[f64],
        sdp: &SummaryValue,
        index: usize,
        out: &mut RecordStatistic,
    ) -> Result<()>;

    /// `ln η(s_dp | x)` expressed through the summed statistic `sx`.
    fn privacy_logdensity(&self, sdp: &SummaryValue, sx: &SummaryValue) -> Result<f64>;

    /// For mechanisms whose log-density is a sum of per-coordinate terms,
    /// the term for coordinate `index` at value `sx`. Returning `Some` lets the
    /// sampler score a record proposal by touching only the changed coordinates.
    fn coordinate_logdensity(&self, _sdp: &SummaryValue, _index: usize, _sx: f64) -> Option<f64> {
        None
    }
}

type PosteriorFn = dyn Fn(&LatentDatabase, &[f64], &mut SimRng) -> Result<Vec<f64>> + Send + Sync;
type LatentFn = dyn Fn(&[f64], &mut SimRng) -> Result<LatentDatabase> + Send + Sync;
type ProposeFn = dyn Fn(&[f64], &mut SimRng) -> Result<Vec<f64>> + Send + Sync;
type PrivacyFn = dyn Fn(&SummaryValue, &SummaryValue) -> Result<f64> + Send + Sync;
type StatisticFn = dyn Fn(&[f64], &SummaryValue, usize) -> Result<SummaryValue> + Send + Sync;

/// A [`PrivacyModel`] assembled from closures, for ad-hoc models.
pub struct CustomModel {
    npar: usize,
    varnames: Option<Vec<String>>,
    posterior: Box<PosteriorFn>,
    latent: Box<LatentFn>,
    propose: Box<ProposeFn>,
    privacy: Box<PrivacyFn>,
    statistic: Box<StatisticFn>,
}

impl CustomModel {
    pub fn new(
        npar: usize,
        posterior: impl Fn(&LatentDatabase, &[f64], &mut SimRng) -> Result<Vec<f64>> + Send + Sync + 'static,
        latent: impl Fn(&[f64], &mut SimRng) -> Result<LatentDatabase> + Send + Sync + 'static,
        propose: impl Fn(&[f64], &mut SimRng) -> Result<Vec<f64>> + Send + Sync + 'static,
        privacy: impl Fn(&SummaryValue, &SummaryValue) -> Result<f64> + Send + Sync + 'static,
        statistic: impl Fn(&[f64], &SummaryValue, usize) -> Result<SummaryValue> + Send + Sync + 'static,
    ) -> Self {
        Self {
            npar,
            varnames: None,
            posterior: Box::new(posterior),
            latent: Box::new(latent),
            propose: Box::new(propose),
            privacy: Box::new(privacy),
            statistic: Box::new(statistic),
        }
    }

    pub fn with_varnames(mut self, names: Vec<String>) -> Self {
        self.varnames = Some(names);
        self
    }
}

impl PrivacyModel for CustomModel {
    fn npar(&self) -> usize {
        self.npar
    }

    fn varnames(&self) -> Vec<String> {
        match &self.varnames {
            Some(v) => v.clone(),
            None => (1..=self.npar).map(|i| format!("theta{i}")).collect(),
        }
    }

    fn posterior_step(&self, data: &LatentDatabase, theta: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
        (self.posterior)(data, theta, rng)
    }

    fn sample_latent(&self, theta: &[f64], rng: &mut SimRng) -> Result<LatentDatabase> {
        (self.latent)(theta, rng)
    }

    fn propose_record(&self, theta: &[f64], rng: &mut SimRng, out: &mut [f64]) -> Result<()> {
        let rec = (self.propose)(theta, rng)?;
        if rec.len() != out.len() {
            return Err(crate::Error::Input(format!(
                "proposed record has {} columns, expected {}",
                rec.len(),
                out.len()
            )));
        }
        out.copy_from_slice(&rec);
        Ok(())
    }

    fn record_statistic(
        &self,
        record: &[f64],
        sdp: &SummaryValue,
        index: usize,
        out: &mut RecordStatistic,
    ) -> Result<()> {
        let v = (self.statistic)(record, sdp, index)?;
        out.set_dense(v.shape(), v.as_slice());
        Ok(())
    }

    fn privacy_logdensity(&self, sdp: &SummaryValue, sx: &SummaryValue) -> Result<f64> {
        (self.privacy)(sdp, sx)
    }
}
