use crate::error::{Error, Result};
use crate::scalar::Real;

/// Imputed confidential records: an `n × p` row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentDatabase {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl LatentDatabase {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Input(format!("latent database must be non-empty, got {rows}×{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::Input(format!(
                "{} values cannot fill a {rows}×{cols} database",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite entry at row {}, column {}",
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != cols {
                return Err(Error::Input(format!("row {i} has {} columns, expected {cols}", r.as_ref().len())));
            }
            values.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// A released statistic or a running total of record contributions.
/// Vectors have shape `(len, 1)`; storage is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryValue {
    shape: (usize, usize),
    values: Vec<f64>,
}

impl SummaryValue {
    pub fn vector(values: Vec<f64>) -> Self {
        Self {
            shape: (values.len(), 1),
            values,
        }
    }

    pub fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Input(format!(
                "{} values cannot fill a {rows}×{cols} summary",
                values.len()
            )));
        }
        Ok(Self {
            shape: (rows, cols),
            values,
        })
    }

    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.0 * shape.1],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.shape.1 + col]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One record's contribution `t_i(x_i, s_dp)`, stored sparsely as
/// `(flat index, value)` pairs against a fixed summary shape.
///
/// Entries not listed are zero. Indices may repeat; repeats add.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordStatistic {
    shape: (usize, usize),
    entries: Vec<(usize, f64)>,
}

impl RecordStatistic {
    pub fn new(shape: (usize, usize)) -> Self {
        Self {
            shape,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(value: &SummaryValue) -> Self {
        let mut s = Self::new(value.shape());
        s.set_dense(value.shape(), value.as_slice());
        s
    }

    /// Resets to an empty contribution of the given shape.
    pub fn reset(&mut self, shape: (usize, usize)) {
        self.shape = shape;
        self.entries.clear();
    }

    /// Replaces the contents with a dense vector of values.
    pub fn set_dense(&mut self, shape: (usize, usize), values: &[f64]) {
        debug_assert_eq!(shape.0 * shape.1, values.len());
        self.reset(shape);
        self.entries.extend(values.iter().copied().enumerate());
    }

    pub fn push(&mut self, index: usize, value: f64) {
        self.entries.push((index, value));
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> SummaryValue {
        let mut out = SummaryValue::zeros(self.shape);
        self.add_to(&mut out, 1.0);
        out
    }

    pub(crate) fn add_to(&self, total: &mut SummaryValue, sign: f64) {
        let values = total.as_mut_slice();
        for &(j, v) in &self.entries {
            values[j] += sign * v;
        }
    }

    pub(crate) fn validate(&self, len: usize) -> Result<()> {
        for &(j, v) in &self.entries {
            if j >= len {
                return Err(Error::Input(format!("statistic index {j} outside summary of length {len}")));
            }
            if !v.is_finite() {
                return Err(Error::Numeric(format!("non-finite statistic entry at index {j}")));
            }
        }
        Ok(())
    }
}

/// `total - old + new`, elementwise.
pub fn update_statistic(total: &SummaryValue, old: &SummaryValue, new: &SummaryValue) -> Result<SummaryValue> {
    if total.shape() != old.shape() || total.shape() != new.shape() {
        return Err(Error::Input(format!(
            "shape mismatch: total {:?}, old {:?}, new {:?}",
            total.shape(),
            old.shape(),
            new.shape()
        )));
    }
    let values = total
        .as_slice()
        .iter()
        .zip(old.as_slice())
        .zip(new.as_slice())
        .map(|((t, o), n)| t - o + n)
        .collect();
    Ok(SummaryValue {
        shape: total.shape(),
        values,
    })
}

/// Total iterations, discarded warmup, chain count, base seed and the
/// starting parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub niter: usize,
    pub warmup: usize,
    pub chains: usize,
    pub seed: u64,
    pub init_par: Vec<f64>,
}

impl SamplerConfig {
    /// Defaults mirror common usage: warmup is half of `niter`, one chain.
    pub fn new(niter: usize, init_par: Vec<f64>) -> Self {
        Self {
            niter,
            warmup: niter / 2,
            chains: 1,
            seed: 0,
            init_par,
        }
    }

    pub fn warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn retained(&self) -> usize {
        self.niter - self.warmup
    }

    pub fn validate(&self) -> Result<()> {
        if self.niter == 0 {
            return Err(Error::Config("niter must be at least 1".into()));
        }
        if self.warmup >= self.niter {
            return Err(Error::Config(format!(
                "warmup ({}) must be smaller than niter ({})",
                self.warmup, self.niter
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if let Some(i) = self.init_par.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("init_par[{i}] is not finite")));
        }
        Ok(())
    }
}

/// Posterior draws laid out as `chains × draws × npar`.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawsMatrix<F = f64> {
    chains: usize,
    draws: usize,
    varnames: Vec<String>,
    values: Vec<F>,
}

impl<F: Real> DrawsMatrix<F> {
    pub fn new(chains: usize, draws: usize, varnames: Vec<String>, values: Vec<F>) -> Result<Self> {
        if values.len() != chains * draws * varnames.len() {
            return Err(Error::Input(format!(
                "{} values do not match {chains} chains × {draws} draws × {} variables",
                values.len(),
                varnames.len()
            )));
        }
        Ok(Self {
            chains,
            draws,
            varnames,
            values,
        })
    }

    /// Stacks per-chain draw rows, each `draws × npar` row-major.
    pub fn from_chains(varnames: Vec<String>, per_chain: Vec<Vec<F>>) -> Result<Self> {
        let npar = varnames.len();
        let chains = per_chain.len();
        let draws = if npar == 0 { 0 } else { per_chain.first().map_or(0, |c| c.len() / npar) };
        if per_chain.iter().any(|c| c.len() != draws * npar) {
            return Err(Error::Input("chains hold different numbers of draws".into()));
        }
        Self::new(chains, draws, varnames, per_chain.into_iter().flatten().collect())
    }

    pub fn nchains(&self) -> usize {
        self.chains
    }

    pub fn ndraws(&self) -> usize {
        self.draws
    }

    pub fn npar(&self) -> usize {
        self.varnames.len()
    }

    pub fn varnames(&self) -> &[String] {
        &self.varnames
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    #[inline]
    pub fn get(&self, chain: usize, draw: usize, par: usize) -> F {
        self.values[(chain * self.draws + draw) * self.npar() + par]
    }

    /// Draw row `draw` of `chain`.
    pub fn row(&self, chain: usize, draw: usize) -> &[F] {
        let p = self.npar();
        let start = (chain * self.draws + draw) * p;
        &self.values[start..start + p]
    }

    /// One series per chain for variable `par`.
    pub fn variable(&self, par: usize) -> Vec<Vec<F>> {
        (0..self.chains)
            .map(|c| (0..self.draws).map(|d| self.get(c, d, par)).collect())
            .collect()
    }

    /// All draws of variable `par`, chains concatenated.
    pub fn pooled(&self, par: usize) -> Vec<F> {
        self.variable(par).into_iter().flatten().collect()
    }
}

/// Draws plus one acceptance series per chain (length `niter`, warmup included).
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerOutput {
    pub draws: DrawsMatrix<f64>,
    pub acceptance: Vec<Vec<f64>>,
}
