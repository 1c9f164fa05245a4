use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::engine::{LatentDatabase, PrivacyModel, RecordStatistic, SimRng, SummaryValue};
use crate::error::{Error, Result};
use crate::mechanisms::{DiscreteGaussian, RandomizedResponse};

/// Record patterns in cell order: (1,1), (1,0), (0,1), (0,0).
pub const CELL_PATTERNS: [[f64; 2]; 4] = [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];

pub const TABLE_VARNAMES: [&str; 4] = ["pi_11", "pi_10", "pi_01", "pi_00"];

const SIMPLEX_TOL: f64 = 1e-9;

/// Cell of a binary record `(a, b)`.
pub fn cell_index(xi: &[f64]) -> Result<usize> {
    match xi {
        [a, b] if is_bit(*a) && is_bit(*b) => Ok(((1.0 - a) * 2.0 + (1.0 - b)) as usize),
        [_, _] => Err(Error::Input(format!("record {xi:?} is not binary"))),
        _ => Err(Error::Input(format!("record has {} columns, expected 2", xi.len()))),
    }
}

fn is_bit(v: f64) -> bool {
    v == 0.0 || v == 1.0
}

pub fn cell_counts(dmat: &LatentDatabase) -> Result<[usize; 4]> {
    let mut counts = [0usize; 4];
    for (i, row) in dmat.rows().enumerate() {
        counts[cell_index(row).map_err(|e| e.at_record(i))?] += 1;
    }
    Ok(counts)
}

pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let gamma = Gamma::new(a, 1.0).map_err(|_| Error::param("alpha", format!("must be positive, got {a}")))?;
        g.push(gamma.sample(rng));
    }
    let s: f64 = g.iter().sum();
    if !(s > 0.0) {
        return Err(Error::Numeric("Dirichlet gamma draws summed to zero".into()));
    }
    Ok(g.into_iter().map(|v| v / s).collect())
}

/// Conjugate update: counts the four cells and draws `Dirichlet(counts + prior)`.
pub fn dirichlet_posterior_step<R: Rng + ?Sized>(dmat: &LatentDatabase, prior: &[f64; 4], rng: &mut R) -> Result<Vec<f64>> {
    let counts = cell_counts(dmat)?;
    let alpha: Vec<f64> = counts.iter().zip(prior).map(|(&c, &a)| c as f64 + a).collect();
    sample_dirichlet(&alpha, rng)
}

fn check_simplex(theta: &[f64]) -> Result<()> {
    if theta.len() != 4 {
        return Err(Error::Input(format!("cell probabilities have length {}, expected 4", theta.len())));
    }
    if theta.iter().any(|&p| !(p >= -SIMPLEX_TOL) || !p.is_finite()) {
        return Err(Error::Input(format!("cell probabilities {theta:?} contain a negative entry")));
    }
    let s: f64 = theta.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Input(format!("cell probabilities sum to {s}, expected 1")));
    }
    Ok(())
}

#[inline]
fn sample_cell<R: Rng + ?Sized>(theta: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * theta.iter().sum::<f64>();
    let mut acc = 0.0;
    for (k, &p) in theta.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // u landed on the rounding gap at the top; take the last non-empty cell
    theta.iter().rposition(|&p| p > 0.0).unwrap_or(3)
}

/// `n` i.i.d. categorical records as an `n × 2` binary matrix.
pub fn multinomial_latent<R: Rng + ?Sized>(theta: &[f64], n: usize, rng: &mut R) -> Result<LatentDatabase> {
    check_simplex(theta)?;
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..n {
        values.extend_from_slice(&CELL_PATTERNS[sample_cell(theta, rng)]);
    }
    LatentDatabase::new(n, 2, values)
}

/// `n × 2` zero matrix carrying `xi` in row `i` (0-based).
pub fn rr_record_stat(xi: &[f64], n: usize, i: usize) -> Result<SummaryValue> {
    if i >= n {
        return Err(Error::Input(format!("record index {i} outside 0..{n}")));
    }
    cell_index(xi)?;
    let mut v = vec![0.0; 2 * n];
    v[2 * i..2 * i + 2].copy_from_slice(xi);
    SummaryValue::matrix(n, 2, v)
}

/// One-hot indicator of the record's cell.
pub fn cell_indicator_stat(xi: &[f64]) -> Result<SummaryValue> {
    let mut v = vec![0.0; 4];
    v[cell_index(xi)?] = 1.0;
    Ok(SummaryValue::vector(v))
}

/// `Σ_j ln ddnorm(sdp_j - sx_j; 0, σ)`.
pub fn dgauss_count_loglik(sdp: &[f64], sx: &[f64], sigma: f64) -> Result<f64> {
    if sdp.len() != sx.len() {
        return Err(Error::Input(format!("length mismatch: {} vs {}", sdp.len(), sx.len())));
    }
    let d = DiscreteGaussian::new(0.0, sigma)?;
    Ok(sdp.iter().zip(sx).map(|(a, b)| d.ln_pmf(a - b)).sum())
}

/// Dirichlet posterior that treats noisy counts as exact.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveTablePosterior {
    alpha: [f64; 4],
}

impl NaiveTablePosterior {
    pub fn alpha(&self) -> &[f64; 4] {
        &self.alpha
    }

    pub fn mean(&self) -> [f64; 4] {
        let s: f64 = self.alpha.iter().sum();
        self.alpha.map(|a| a / s)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        sample_dirichlet(&self.alpha, rng).expect("alpha is positive by construction")
    }
}

/// Negative noisy counts are floored at zero before the prior is added.
pub fn naive_table_posterior(noisy_counts: &[f64; 4], prior: &[f64; 4]) -> Result<NaiveTablePosterior> {
    if prior.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::param("prior", "concentrations must be positive"));
    }
    if noisy_counts.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("noisy counts must be finite".into()));
    }
    let mut alpha = [0.0; 4];
    for k in 0..4 {
        alpha[k] = noisy_counts[k].max(0.0) + prior[k];
    }
    Ok(NaiveTablePosterior { alpha })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TableMechanism {
    /// Every response bit released through randomized response; `s_dp` is
    /// the `n × 2` matrix of released bits.
    RandomizedResponse(RandomizedResponse<f64>),
    /// Cell counts released with additive discrete Gaussian noise; `s_dp` is
    /// the 4-vector of noisy counts.
    DiscreteGaussian(DiscreteGaussian<f64>),
}

impl TableMechanism {
    pub fn randomized_response(keep_prob: f64) -> Result<Self> {
        Ok(Self::RandomizedResponse(RandomizedResponse::new(keep_prob)?))
    }

    pub fn discrete_gaussian(sigma: f64) -> Result<Self> {
        Ok(Self::DiscreteGaussian(DiscreteGaussian::new(0.0, sigma)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableModelSpec {
    pub n: usize,
    pub mechanism: TableMechanism,
    pub prior: [f64; 4],
}

impl TableModelSpec {
    /// Flat `Dirichlet(1, 1, 1, 1)` prior.
    pub fn new(n: usize, mechanism: TableMechanism) -> Self {
        Self {
            n,
            mechanism,
            prior: [1.0; 4],
        }
    }
}

/// 2×2 table of `n` binary record pairs with a Dirichlet prior on the cell
/// probabilities `(π₁₁, π₁₀, π₀₁, π₀₀)`.
#[derive(Clone, Debug)]
pub struct TableModel {
    spec: TableModelSpec,
    rr_logs: (f64, f64),
}

impl TableModel {
    pub fn new(spec: TableModelSpec) -> Result<Self> {
        if spec.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if spec.prior.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::param("prior", format!("concentrations must be positive, got {:?}", spec.prior)));
        }
        let rr_logs = match spec.mechanism {
            TableMechanism::RandomizedResponse(rr) => rr.log_probs(),
            TableMechanism::DiscreteGaussian(_) => (0.0, 0.0),
        };
        Ok(Self { spec, rr_logs })
    }

    pub fn spec(&self) -> &TableModelSpec {
        &self.spec
    }

    /// Shape of the released statistic.
    pub fn sdp_shape(&self) -> (usize, usize) {
        match self.spec.mechanism {
            TableMechanism::RandomizedResponse(_) => (self.spec.n, 2),
            TableMechanism::DiscreteGaussian(_) => (4, 1),
        }
    }

    /// Record-level released bits rebuilt from a published table of response
    /// patterns (counts in cell order). Only the pattern counts enter the
    /// likelihood, so the row order is immaterial.
    pub fn rr_sdp_from_table(counts: &[u64; 4]) -> SummaryValue {
        let n: u64 = counts.iter().sum();
        let mut v = Vec::with_capacity(2 * n as usize);
        for (k, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                v.extend_from_slice(&CELL_PATTERNS[k]);
            }
        }
        SummaryValue::matrix(n as usize, 2, v).expect("length is 2n")
    }

    /// Applies the configured mechanism to a confidential database.
    pub fn release<R: Rng + ?Sized>(&self, confidential: &LatentDatabase, rng: &mut R) -> Result<SummaryValue> {
        match self.spec.mechanism {
            TableMechanism::RandomizedResponse(rr) => {
                let bits: Vec<u8> = confidential.as_slice().iter().map(|&v| v as u8).collect();
                cell_counts(confidential)?;
                let out = rr.apply(&bits, rng)?;
                SummaryValue::matrix(confidential.nrows(), 2, out.into_iter().map(f64::from).collect())
            }
            TableMechanism::DiscreteGaussian(dg) => {
                let counts = cell_counts(confidential)?;
                Ok(SummaryValue::vector(
                    counts.iter().map(|&c| (c as i64 + dg.sample(rng)) as f64).collect(),
                ))
            }
        }
    }
}

impl PrivacyModel for TableModel {
    fn npar(&self) -> usize {
        4
    }

    fn varnames(&self) -> Vec<String> {
        TABLE_VARNAMES.iter().map(|s| s.to_string()).collect()
    }

    fn posterior_step(&self, data: &LatentDatabase, _theta: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
        dirichlet_posterior_step(data, &self.spec.prior, rng)
    }

    fn sample_latent(&self, theta: &[f64], rng: &mut SimRng) -> Result<LatentDatabase> {
        multinomial_latent(theta, self.spec.n, rng)
    }

    fn propose_record(&self, theta: &[f64], rng: &mut SimRng, out: &mut [f64]) -> Result<()> {
        check_simplex(theta)?;
        out.copy_from_slice(&CELL_PATTERNS[sample_cell(theta, rng)]);
        Ok(())
    }

    fn record_statistic(&self, record: &[f64], sdp: &SummaryValue, index: usize, out: &mut RecordStatistic) -> Result<()> {
        let cell = cell_index(record)?;
        match self.spec.mechanism {
            TableMechanism::RandomizedResponse(_) => {
                let (n, _) = sdp.shape();
                if index >= n {
                    return Err(Error::Input(format!("record index {index} outside 0..{n}")));
                }
                out.reset((n, 2));
                out.push(2 * index, record[0]);
                out.push(2 * index + 1, record[1]);
            }
            TableMechanism::DiscreteGaussian(_) => {
                out.reset((4, 1));
                out.push(cell, 1.0);
            }
        }
        Ok(())
    }

    fn privacy_logdensity(&self, sdp: &SummaryValue, sx: &SummaryValue) -> Result<f64> {
        match self.spec.mechanism {
            TableMechanism::RandomizedResponse(rr) => rr.loglik(sdp.as_slice(), sx.as_slice()),
            TableMechanism::DiscreteGaussian(dg) => Ok(sdp
                .as_slice()
                .iter()
                .zip(sx.as_slice())
                .map(|(a, b)| dg.ln_pmf(a - b))
                .sum()),
        }
    }

    fn coordinate_logdensity(&self, sdp: &SummaryValue, index: usize, sx: f64) -> Option<f64> {
        let released = sdp.as_slice()[index];
        Some(match self.spec.mechanism {
            TableMechanism::RandomizedResponse(_) => {
                if released == sx {
                    self.rr_logs.0
                } else {
                    self.rr_logs.1
                }
            }
            TableMechanism::DiscreteGaussian(dg) => dg.ln_pmf(released - sx),
        })
    }
}
