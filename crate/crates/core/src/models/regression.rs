use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::spd::nearest_spd;
use crate::engine::{LatentDatabase, PrivacyModel, RecordStatistic, SimRng, SummaryValue};
use crate::error::{Error, Result};
use crate::mechanisms::Laplace;
use crate::scalar::Real;

/// Linear regression `y = (1, x)ᵀβ + N(0, σ²)` with `x ~ N_p(μ_x, I)`,
/// released as clamped sufficient statistics plus Laplace noise.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionModelSpec {
    pub n: usize,
    pub p: usize,
    pub mu_x: Vec<f64>,
    /// Known noise standard deviation σ.
    pub sigma_noise: f64,
    /// Prior variance of each coefficient.
    pub tau2: f64,
    pub clamp_bound: f64,
    pub epsilon: f64,
    /// ℓ₁ sensitivity of the clamped statistic.
    pub sensitivity: f64,
}

impl Default for RegressionModelSpec {
    fn default() -> Self {
        Self {
            n: 50,
            p: 2,
            mu_x: vec![0.9, -1.17],
            sigma_noise: 2.0,
            tau2: 4.0,
            clamp_bound: 10.0,
            epsilon: 10.0,
            sensitivity: 15.0,
        }
    }
}

impl RegressionModelSpec {
    pub fn laplace_scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if self.p == 0 {
            return Err(Error::param("p", "must be at least 1"));
        }
        if self.mu_x.len() != self.p {
            return Err(Error::param("mu_x", format!("has length {}, expected p = {}", self.mu_x.len(), self.p)));
        }
        for (name, v) in [
            ("sigma_noise", self.sigma_noise),
            ("tau2", self.tau2),
            ("clamp_bound", self.clamp_bound),
            ("epsilon", self.epsilon),
            ("sensitivity", self.sensitivity),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Truncates `z` to `[-bound, bound]` and rescales to `[-1, 1]`.
#[inline]
pub fn clamp<F: Real>(z: F, bound: F) -> F {
    z.max(-bound).min(bound) / bound
}

/// Length of the de-duplicated statistic for `p` covariates.
pub fn regression_stat_len(p: usize) -> usize {
    let q = p + 1;
    q + 1 + q * (q + 1) / 2 - 1
}

fn write_record_stat(record: &[f64], bound: f64, out: &mut [f64]) {
    let q = record.len();
    let y = clamp(record[0], bound);
    // design row d = (1, x̃_1, ..., x̃_p)
    let d = |k: usize| if k == 0 { 1.0 } else { clamp(record[k], bound) };
    let mut w = 0;
    for k in 0..q {
        out[w] = d(k) * y;
        w += 1;
    }
    out[w] = y * y;
    w += 1;
    // upper triangle of dᵀd, column-major, skipping the constant (0,0) entry
    for c in 0..q {
        for r in 0..=c {
            if c == 0 {
                continue;
            }
            out[w] = d(r) * d(c);
            w += 1;
        }
    }
}

/// Per-record contribution `(d ỹ, ỹ², upper(dᵀd) \ {1})` for a record
/// laid out as `(y, x_1, ..., x_p)`.
pub fn regression_record_stat(record: &[f64], bound: f64) -> Result<Vec<f64>> {
    if record.len() < 2 {
        return Err(Error::Input(format!("record has {} entries, expected (y, x_1, ..., x_p)", record.len())));
    }
    if !(bound > 0.0) {
        return Err(Error::param("bound", format!("must be positive, got {bound}")));
    }
    let mut out = vec![0.0; regression_stat_len(record.len() - 1)];
    write_record_stat(record, bound, &mut out);
    Ok(out)
}

/// `n × (p + 1)` database with columns `(y, x_1, ..., x_p)`.
pub fn regression_latent<R: Rng + ?Sized>(theta: &[f64], spec: &RegressionModelSpec, rng: &mut R) -> Result<LatentDatabase> {
    if theta.len() != spec.p + 1 {
        return Err(Error::Input(format!("β has length {}, expected {}", theta.len(), spec.p + 1)));
    }
    let mut values = Vec::with_capacity(spec.n * (spec.p + 1));
    let mut row = vec![0.0; spec.p + 1];
    for _ in 0..spec.n {
        draw_record(theta, spec, rng, &mut row);
        values.extend_from_slice(&row);
    }
    LatentDatabase::new(spec.n, spec.p + 1, values)
}

#[inline]
fn draw_record<R: Rng + ?Sized>(theta: &[f64], spec: &RegressionModelSpec, rng: &mut R, out: &mut [f64]) {
    let mut y = theta[0];
    for k in 0..spec.p {
        let z: f64 = StandardNormal.sample(rng);
        let x = spec.mu_x[k] + z;
        out[k + 1] = x;
        y += theta[k + 1] * x;
    }
    let e: f64 = StandardNormal.sample(rng);
    out[0] = y + spec.sigma_noise * e;
}

/// Gaussian posterior `N(μ_n, Σ_n)` with `Σ_n = (XᵀX/σ² + I/τ²)⁻¹` and
/// `μ_n = Σ_n Xᵀy / σ²`.
#[derive(Clone, Debug)]
pub struct NormalPosterior {
    mean: DVector<f64>,
    precision_chol: Cholesky<f64, Dyn>,
}

impl NormalPosterior {
    pub fn from_moments(xtx: &DMatrix<f64>, xty: &DVector<f64>, sigma2: f64, tau2: f64) -> Result<Self> {
        let q = xty.len();
        if xtx.shape() != (q, q) {
            return Err(Error::Input(format!("XᵀX is {:?}, expected {q}×{q}", xtx.shape())));
        }
        let precision = xtx / sigma2 + DMatrix::identity(q, q) / tau2;
        let chol = Cholesky::new(precision).ok_or_else(|| Error::Numeric("posterior precision is not positive definite".into()))?;
        let mean = chol.solve(&(xty / sigma2));
        Ok(Self {
            mean,
            precision_chol: chol,
        })
    }

    /// Intercept column prepended to the covariates of `(y, x...)` rows.
    pub fn from_data(dmat: &LatentDatabase, sigma2: f64, tau2: f64) -> Result<Self> {
        let q = dmat.ncols();
        let mut xtx = DMatrix::<f64>::zeros(q, q);
        let mut xty = DVector::<f64>::zeros(q);
        let mut d = vec![1.0; q];
        for row in dmat.rows() {
            d[1..].copy_from_slice(&row[1..]);
            let y = row[0];
            for a in 0..q {
                xty[a] += d[a] * y;
                for b in 0..=a {
                    xtx[(a, b)] += d[a] * d[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                xtx[(b, a)] = xtx[(a, b)];
            }
        }
        Self::from_moments(&xtx, &xty, sigma2, tau2)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.precision_chol.inverse()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let q = self.mean.len();
        let z = DVector::from_iterator(q, (0..q).map(|_| StandardNormal.sample(rng)));
        // precision = L Lᵀ, so L⁻ᵀ z has covariance Σ_n
        let w = self
            .precision_chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        (&self.mean + w).iter().copied().collect()
    }
}

pub fn regression_posterior_step<R: Rng + ?Sized>(dmat: &LatentDatabase, spec: &RegressionModelSpec, rng: &mut R) -> Result<Vec<f64>> {
    if dmat.ncols() != spec.p + 1 {
        return Err(Error::Input(format!("database has {} columns, expected {}", dmat.ncols(), spec.p + 1)));
    }
    let post = NormalPosterior::from_data(dmat, spec.sigma_noise * spec.sigma_noise, spec.tau2)?;
    Ok(post.sample(rng))
}

/// `p² + 4p + 3`.
pub fn l1_sensitivity_regression(p: usize) -> Result<f64> {
    if p < 1 {
        return Err(Error::param("p", "must be at least 1"));
    }
    let p = p as f64;
    Ok(p * p + 4.0 * p + 3.0)
}

pub fn laplace_regression_loglik(sdp: &[f64], sx: &[f64], scale: f64) -> Result<f64> {
    if sdp.len() != sx.len() {
        return Err(Error::Input(format!("length mismatch: {} vs {}", sdp.len(), sx.len())));
    }
    let lap = Laplace::new(0.0, scale)?;
    Ok(sdp.iter().zip(sx).map(|(a, b)| lap.ln_pdf(a - b)).sum())
}

/// Flat-prior normal posterior read directly off the noisy statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct NaivePosterior {
    pub beta_hat: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

/// Rebuilds `Xᵀy` and `XᵀX` from the noisy statistic, inverts, repairs the
/// inverse to the nearest positive definite matrix, and returns
/// `β̂ = (XᵀX)⁻¹Xᵀy` with covariance `σ²(XᵀX)⁻¹`.
pub fn naive_regression_posterior(sdp: &[f64], n: usize, sigma_noise: f64) -> Result<NaivePosterior> {
    let q = (1..=16)
        .find(|&p| regression_stat_len(p) == sdp.len())
        .map(|p| p + 1)
        .ok_or_else(|| Error::Input(format!("statistic of length {} matches no covariate count", sdp.len())))?;
    let xty = DVector::from_column_slice(&sdp[..q]);
    let mut xtx = DMatrix::<f64>::zeros(q, q);
    let mut upper = std::iter::once(n as f64).chain(sdp[q + 1..].iter().copied());
    for c in 0..q {
        for r in 0..=c {
            let v = upper.next().expect("statistic length checked above");
            xtx[(r, c)] = v;
            xtx[(c, r)] = v;
        }
    }
    let inverse = match xtx.clone().try_inverse() {
        Some(inv) => inv,
        None => xtx
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Numeric(format!("cannot invert reconstructed XᵀX: {e}")))?,
    };
    let repaired = nearest_spd(&inverse)?;
    let beta_hat = (&repaired * xty).iter().copied().collect();
    Ok(NaivePosterior {
        beta_hat,
        covariance: repaired * (sigma_noise * sigma_noise),
    })
}

/// A confidential regression database with its exact and noisy statistic.
#[derive(Clone, Debug)]
pub struct RegressionRelease {
    pub confidential: LatentDatabase,
    pub statistic: SummaryValue,
    pub sdp: SummaryValue,
}

pub fn simulate_regression_release<R: Rng + ?Sized>(
    spec: &RegressionModelSpec,
    beta: &[f64],
    rng: &mut R,
) -> Result<RegressionRelease> {
    spec.validate()?;
    let confidential = regression_latent(beta, spec, rng)?;
    let mut total = vec![0.0; regression_stat_len(spec.p)];
    let mut buf = vec![0.0; total.len()];
    for row in confidential.rows() {
        write_record_stat(row, spec.clamp_bound, &mut buf);
        for (t, b) in total.iter_mut().zip(&buf) {
            *t += b;
        }
    }
    let lap = Laplace::new(0.0, spec.laplace_scale())?;
    let noisy = total.iter().map(|&v| v + lap.sample(rng)).collect();
    Ok(RegressionRelease {
        confidential,
        statistic: SummaryValue::vector(total),
        sdp: SummaryValue::vector(noisy),
    })
}

/// Privacy-aware regression: latent records `(y, x)`, conjugate normal
/// posterior step, Laplace noise on every statistic coordinate.
#[derive(Clone, Debug)]
pub struct RegressionModel {
    spec: RegressionModelSpec,
    noise: Laplace<f64>,
    varnames: Vec<String>,
}

impl RegressionModel {
    pub fn new(spec: RegressionModelSpec) -> Result<Self> {
        spec.validate()?;
        let noise = Laplace::new(0.0, spec.laplace_scale())?;
        let varnames = (0..=spec.p).map(|k| format!("beta{k}")).collect();
        Ok(Self { spec, noise, varnames })
    }

    pub fn spec(&self) -> &RegressionModelSpec {
        &self.spec
    }
}

impl PrivacyModel for RegressionModel {
    fn npar(&self) -> usize {
        self.spec.p + 1
    }

    fn varnames(&self) -> Vec<String> {
        self.varnames.clone()
    }

    fn posterior_step(&self, data: &LatentDatabase, _theta: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
        regression_posterior_step(data, &self.spec, rng)
    }

    fn sample_latent(&self, theta: &[f64], rng: &mut SimRng) -> Result<LatentDatabase> {
        regression_latent(theta, &self.spec, rng)
    }

    fn propose_record(&self, theta: &[f64], rng: &mut SimRng, out: &mut [f64]) -> Result<()> {
        if theta.len() != self.spec.p + 1 || out.len() != self.spec.p + 1 {
            return Err(Error::Input("β or record length does not match p + 1".into()));
        }
        draw_record(theta, &self.spec, rng, out);
        Ok(())
    }

    fn record_statistic(&self, record: &[f64], _sdp: &SummaryValue, _index: usize, out: &mut RecordStatistic) -> Result<()> {
        if record.len() != self.spec.p + 1 {
            return Err(Error::Input(format!("record has {} entries, expected {}", record.len(), self.spec.p + 1)));
        }
        let len = regression_stat_len(self.spec.p);
        let mut buf = [0.0; 64];
        let buf = buf.get_mut(..len).ok_or_else(|| Error::Capacity(format!("statistic of length {len} too long")))?;
        write_record_stat(record, self.spec.clamp_bound, buf);
        out.set_dense((len, 1), buf);
        Ok(())
    }

    fn privacy_logdensity(&self, sdp: &SummaryValue, sx: &SummaryValue) -> Result<f64> {
        Ok(sdp
            .as_slice()
            .iter()
            .zip(sx.as_slice())
            .map(|(a, b)| self.noise.ln_pdf(a - b))
            .sum())
    }

    fn coordinate_logdensity(&self, sdp: &SummaryValue, index: usize, sx: f64) -> Option<f64> {
        Some(self.noise.ln_pdf(sdp.as_slice()[index] - sx))
    }
}
