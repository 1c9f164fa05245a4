use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use privpost::diagnostics::fraction_missing_info;
use privpost::models::{
    l1_sensitivity_regression, multinomial_latent, regression_stat_len, simulate_regression_release,
    RegressionModel, RegressionModelSpec, TableMechanism, TableModel, TableModelSpec, ToyGaussianModel,
};
use privpost::{PrivacyModel, SamplerConfig, SummaryValue};

use crate::error::{CliError, CliResult};

/// A complete sampler run: model, released statistic, sampler settings and
/// output locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub sdp: SdpConfig,
    pub niter: usize,
    /// Defaults to half of `niter`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    #[serde(default = "one")]
    pub chains: usize,
    pub seed: u64,
    pub init_par: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varnames: Option<Vec<String>>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// 2×2 table, every response bit released through randomized response.
    RrTable {
        n: usize,
        #[serde(default = "two_coin")]
        keep_prob: f64,
        #[serde(default = "flat_prior")]
        prior: [f64; 4],
    },
    /// 2×2 table, cell counts released with discrete Gaussian noise.
    DgaussTable {
        n: usize,
        sigma: f64,
        #[serde(default = "flat_prior")]
        prior: [f64; 4],
    },
    /// Linear regression released as clamped sufficient statistics plus Laplace noise.
    Linreg {
        #[serde(default = "linreg_n")]
        n: usize,
        #[serde(default = "linreg_mu_x")]
        mu_x: Vec<f64>,
        #[serde(default = "linreg_two")]
        sigma_noise: f64,
        #[serde(default = "linreg_tau2")]
        tau2: f64,
        #[serde(default = "linreg_clamp")]
        clamp_bound: f64,
        #[serde(default = "linreg_epsilon")]
        epsilon: f64,
    },
    /// One normal observation released with Gaussian noise of sd 1/ε.
    ToyMixing { epsilon: f64, sigma: f64 },
}

fn two_coin() -> f64 {
    0.75
}

fn flat_prior() -> [f64; 4] {
    [1.0; 4]
}

fn linreg_n() -> usize {
    RegressionModelSpec::default().n
}

fn linreg_mu_x() -> Vec<f64> {
    RegressionModelSpec::default().mu_x
}

fn linreg_two() -> f64 {
    RegressionModelSpec::default().sigma_noise
}

fn linreg_tau2() -> f64 {
    RegressionModelSpec::default().tau2
}

fn linreg_clamp() -> f64 {
    RegressionModelSpec::default().clamp_bound
}

fn linreg_epsilon() -> f64 {
    RegressionModelSpec::default().epsilon
}

/// Where the released statistic comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SdpConfig {
    /// Explicit values: a flat list, or a list of rows for matrix statistics.
    Values(SdpValues),
    /// Table models only: counts in cell order (1,1), (1,0), (0,1), (0,0).
    /// For randomized response these are counts of released response patterns.
    Table([u64; 4]),
    /// Confidential data and noise regenerated from `data_seed` at `truth`.
    Simulate { data_seed: u64, truth: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SdpValues {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_draws")]
    pub draws: PathBuf,
    #[serde(default = "default_acceptance")]
    pub acceptance: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_draws() -> PathBuf {
    PathBuf::from("draws.csv")
}

fn default_acceptance() -> PathBuf {
    PathBuf::from("acceptance.csv")
}

fn default_summary() -> PathBuf {
    PathBuf::from("summary.csv")
}

fn default_manifest() -> PathBuf {
    PathBuf::from("manifest.json")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            draws: default_draws(),
            acceptance: default_acceptance(),
            summary: default_summary(),
            manifest: default_manifest(),
        }
    }
}

impl OutputConfig {
    /// File paths resolved against `dir`, in the order draws, acceptance,
    /// summary, manifest.
    pub fn paths(&self) -> [PathBuf; 4] {
        [&self.draws, &self.acceptance, &self.summary, &self.manifest].map(|p| self.dir.join(p))
    }
}

/// Command-line values that replace top-level config scalars.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub niter: Option<usize>,
    pub warmup: Option<usize>,
    pub chains: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// A resolved configuration ready to sample.
pub struct Problem {
    pub model: Box<dyn PrivacyModel>,
    pub sdp: SummaryValue,
    pub sampler: SamplerConfig,
    pub varnames: Vec<String>,
    /// Quantities computed from the config, echoed into the manifest.
    pub derived: Map<String, Value>,
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_syntax() || inner.is_eof() {
                CliError::Parse {
                    path: path.to_path_buf(),
                    line: inner.line() as u64,
                    message: inner.to_string(),
                }
            } else {
                CliError::config(field, inner.to_string())
            }
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.niter {
            self.niter = v;
        }
        if let Some(v) = o.warmup {
            self.warmup = Some(v);
        }
        if let Some(v) = o.chains {
            self.chains = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.output_dir {
            self.output.dir = v.clone();
        }
    }

    /// Fills defaulted fields so the config echoes exactly what ran.
    pub fn resolved(&self, problem: &Problem) -> Self {
        let mut out = self.clone();
        out.warmup = Some(problem.sampler.warmup);
        out.varnames = Some(problem.varnames.clone());
        out
    }

    pub fn resolve(&self) -> CliResult<Problem> {
        let warmup = self.warmup.unwrap_or(self.niter / 2);
        if self.niter == 0 {
            return Err(CliError::config("niter", "must be at least 1"));
        }
        if warmup >= self.niter {
            return Err(CliError::config(
                "warmup",
                format!("must be smaller than niter ({}), got {warmup}", self.niter),
            ));
        }
        if self.chains == 0 {
            return Err(CliError::config("chains", "must be at least 1"));
        }
        if let Some(i) = self.init_par.iter().position(|v| !v.is_finite()) {
            return Err(CliError::config(format!("init_par[{i}]"), "must be finite"));
        }

        let (model, derived) = self.model.build()?;
        let npar = model.npar();
        if self.init_par.len() != npar {
            return Err(CliError::config(
                "init_par",
                format!("has length {}, the model has {npar} parameters", self.init_par.len()),
            ));
        }
        let varnames = match &self.varnames {
            Some(names) if names.len() != npar => {
                return Err(CliError::config(
                    "varnames",
                    format!("has {} names, the model has {npar} parameters", names.len()),
                ))
            }
            Some(names) => names.clone(),
            None => model.varnames(),
        };
        let sdp = self.build_sdp()?;
        let mut derived = derived;
        derived.insert("sdp_shape".into(), json!([sdp.shape().0, sdp.shape().1]));
        derived.insert("sdp".into(), json!(sdp.as_slice()));
        derived.insert("retained_draws_per_chain".into(), json!(self.niter - warmup));

        let sampler = SamplerConfig::new(self.niter, self.init_par.clone())
            .warmup(warmup)
            .chains(self.chains)
            .seed(self.seed);
        Ok(Problem {
            model,
            sdp,
            sampler,
            varnames,
            derived,
        })
    }

    fn build_sdp(&self) -> CliResult<SummaryValue> {
        let expected = self.model.sdp_shape();
        let sdp = match &self.sdp {
            SdpConfig::Values(SdpValues::Flat(v)) => {
                if expected.1 != 1 && v.len() == expected.0 * expected.1 {
                    SummaryValue::matrix(expected.0, expected.1, v.clone()).map_err(|e| CliError::from_core("sdp.values", e))?
                } else {
                    SummaryValue::vector(v.clone())
                }
            }
            SdpConfig::Values(SdpValues::Rows(rows)) => {
                let cols = rows.first().map_or(0, Vec::len);
                if let Some(i) = rows.iter().position(|r| r.len() != cols) {
                    return Err(CliError::config(format!("sdp.values[{i}]"), format!("has {} entries, expected {cols}", rows[i].len())));
                }
                SummaryValue::matrix(rows.len(), cols, rows.concat()).map_err(|e| CliError::from_core("sdp.values", e))?
            }
            SdpConfig::Table(counts) => self.model.sdp_from_table(counts)?,
            SdpConfig::Simulate { data_seed, truth } => self.model.simulate(*data_seed, truth)?,
        };
        if sdp.shape() != expected {
            return Err(CliError::config(
                "sdp",
                format!("has shape {:?}, the model releases {:?}", sdp.shape(), expected),
            ));
        }
        if !sdp.is_finite() {
            return Err(CliError::config("sdp", "contains non-finite values"));
        }
        if let ModelConfig::RrTable { .. } = self.model {
            if sdp.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(CliError::config("sdp", "randomized-response bits must be 0 or 1"));
            }
        }
        Ok(sdp)
    }
}

impl ModelConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ModelConfig::RrTable { .. } => "rr-table",
            ModelConfig::DgaussTable { .. } => "dgauss-table",
            ModelConfig::Linreg { .. } => "linreg",
            ModelConfig::ToyMixing { .. } => "toy-mixing",
        }
    }

    fn sdp_shape(&self) -> (usize, usize) {
        match self {
            ModelConfig::RrTable { n, .. } => (*n, 2),
            ModelConfig::DgaussTable { .. } => (4, 1),
            ModelConfig::Linreg { mu_x, .. } => (regression_stat_len(mu_x.len()), 1),
            ModelConfig::ToyMixing { .. } => (1, 1),
        }
    }

    fn table_spec(&self) -> CliResult<TableModelSpec> {
        let (n, mechanism, prior) = match self {
            ModelConfig::RrTable { n, keep_prob, prior } => (
                *n,
                TableMechanism::randomized_response(*keep_prob).map_err(|e| CliError::from_core("model", e))?,
                prior,
            ),
            ModelConfig::DgaussTable { n, sigma, prior } => (
                *n,
                TableMechanism::discrete_gaussian(*sigma).map_err(|e| CliError::from_core("model", e))?,
                prior,
            ),
            _ => unreachable!("table_spec is only called for table models"),
        };
        let mut spec = TableModelSpec::new(n, mechanism);
        spec.prior = *prior;
        Ok(spec)
    }

    fn regression_spec(&self) -> CliResult<RegressionModelSpec> {
        let ModelConfig::Linreg {
            n,
            mu_x,
            sigma_noise,
            tau2,
            clamp_bound,
            epsilon,
        } = self
        else {
            unreachable!("regression_spec is only called for linreg");
        };
        let p = mu_x.len();
        let sensitivity = l1_sensitivity_regression(p).map_err(|_| CliError::config("model.mu_x", "must have at least one entry"))?;
        let spec = RegressionModelSpec {
            n: *n,
            p,
            mu_x: mu_x.clone(),
            sigma_noise: *sigma_noise,
            tau2: *tau2,
            clamp_bound: *clamp_bound,
            epsilon: *epsilon,
            sensitivity,
        };
        spec.validate().map_err(|e| CliError::from_core("model", e))?;
        Ok(spec)
    }

    fn build(&self) -> CliResult<(Box<dyn PrivacyModel>, Map<String, Value>)> {
        let mut derived = Map::new();
        let model: Box<dyn PrivacyModel> = match self {
            ModelConfig::RrTable { .. } | ModelConfig::DgaussTable { .. } => {
                Box::new(TableModel::new(self.table_spec()?).map_err(|e| CliError::from_core("model", e))?)
            }
            ModelConfig::Linreg { .. } => {
                let spec = self.regression_spec()?;
                derived.insert("sensitivity".into(), json!(spec.sensitivity));
                derived.insert("laplace_scale".into(), json!(spec.laplace_scale()));
                Box::new(RegressionModel::new(spec).map_err(|e| CliError::from_core("model", e))?)
            }
            ModelConfig::ToyMixing { epsilon, sigma } => {
                let model = ToyGaussianModel::new(*epsilon, *sigma).map_err(|e| CliError::from_core("model", e))?;
                let gamma = fraction_missing_info(*epsilon, *sigma).map_err(|e| CliError::from_core("model", e))?;
                derived.insert("fraction_missing_info".into(), json!(gamma));
                Box::new(model)
            }
        };
        Ok((model, derived))
    }

    fn sdp_from_table(&self, counts: &[u64; 4]) -> CliResult<SummaryValue> {
        match self {
            ModelConfig::RrTable { n, .. } => {
                let total: u64 = counts.iter().sum();
                if total != *n as u64 {
                    return Err(CliError::config("sdp.table", format!("counts sum to {total}, expected n = {n}")));
                }
                Ok(TableModel::rr_sdp_from_table(counts))
            }
            ModelConfig::DgaussTable { .. } => Ok(SummaryValue::vector(counts.iter().map(|&c| c as f64).collect())),
            _ => Err(CliError::config("sdp.table", format!("only table models accept a table, not {}", self.id()))),
        }
    }

    fn simulate(&self, data_seed: u64, truth: &[f64]) -> CliResult<SummaryValue> {
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let path = "sdp.simulate.truth";
        match self {
            ModelConfig::RrTable { n, .. } | ModelConfig::DgaussTable { n, .. } => {
                let model = TableModel::new(self.table_spec()?).map_err(|e| CliError::from_core("model", e))?;
                let data = multinomial_latent(truth, *n, &mut rng).map_err(|e| CliError::config(path, e.to_string()))?;
                model.release(&data, &mut rng).map_err(|e| CliError::from_core("sdp.simulate", e))
            }
            ModelConfig::Linreg { .. } => {
                let spec = self.regression_spec()?;
                if truth.len() != spec.p + 1 || truth.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::config(path, format!("must hold {} finite coefficients", spec.p + 1)));
                }
                simulate_regression_release(&spec, truth, &mut rng)
                    .map(|r| r.sdp)
                    .map_err(|e| CliError::from_core("sdp.simulate", e))
            }
            ModelConfig::ToyMixing { epsilon, sigma } => {
                let [theta] = truth else {
                    return Err(CliError::config(path, "must hold exactly one value"));
                };
                let x = Normal::new(*theta, *sigma).map_err(|e| CliError::config(path, e.to_string()))?.sample(&mut rng);
                let noise = Normal::new(0.0, 1.0 / epsilon).map_err(|e| CliError::config("model.epsilon", e.to_string()))?;
                Ok(SummaryValue::vector(vec![x + noise.sample(&mut rng)]))
            }
        }
    }
}

/// Example runs reproducing the worked examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    RrTable,
    DgaussTable,
    Linreg,
    ToyMixing,
}

/// Published noisy table of the randomized-response example in cell order:
/// record = (male, admitted).
pub const RR_PUBLISHED_TABLE: [u64; 4] = [104, 120, 74, 102];

/// Published noisy counts of the discrete Gaussian example in cell order.
pub const DGAUSS_PUBLISHED_COUNTS: [u64; 4] = [110, 131, 47, 110];

impl Example {
    pub fn config(self, published_table: bool) -> CliResult<RunConfig> {
        let name = match self {
            Example::RrTable => "rr-table",
            Example::DgaussTable => "dgauss-table",
            Example::Linreg => "linreg",
            Example::ToyMixing => "toy-mixing",
        };
        if published_table && matches!(self, Example::Linreg | Example::ToyMixing) {
            return Err(CliError::config("--published-table", format!("example {name} has no published table")));
        }
        let output = OutputConfig {
            dir: PathBuf::from(name),
            ..OutputConfig::default()
        };
        let (model, sdp, niter, warmup, init_par) = match self {
            Example::RrTable => (
                ModelConfig::RrTable {
                    n: 400,
                    keep_prob: 0.75,
                    prior: flat_prior(),
                },
                if published_table {
                    SdpConfig::Table(RR_PUBLISHED_TABLE)
                } else {
                    SdpConfig::Simulate {
                        data_seed: 1,
                        truth: vec![0.281, 0.336, 0.111, 0.272],
                    }
                },
                6000,
                1000,
                vec![0.25; 4],
            ),
            Example::DgaussTable => (
                ModelConfig::DgaussTable {
                    n: 400,
                    sigma: 6.32,
                    prior: flat_prior(),
                },
                SdpConfig::Table(DGAUSS_PUBLISHED_COUNTS),
                2000,
                1000,
                vec![0.25; 4],
            ),
            Example::Linreg => (
                ModelConfig::Linreg {
                    n: linreg_n(),
                    mu_x: linreg_mu_x(),
                    sigma_noise: linreg_two(),
                    tau2: linreg_tau2(),
                    clamp_bound: linreg_clamp(),
                    epsilon: linreg_epsilon(),
                },
                SdpConfig::Simulate {
                    data_seed: 1,
                    truth: vec![-1.79, -2.89, -0.66],
                },
                25_000,
                1000,
                vec![0.0; 3],
            ),
            Example::ToyMixing => (
                ModelConfig::ToyMixing { epsilon: 1.0, sigma: 1.0 },
                SdpConfig::Simulate {
                    data_seed: 1,
                    truth: vec![0.0],
                },
                10_000,
                1000,
                vec![0.0],
            ),
        };
        Ok(RunConfig {
            model,
            sdp,
            niter,
            warmup: Some(warmup),
            chains: 4,
            seed: 123,
            init_par,
            varnames: None,
            output,
        })
    }
}
