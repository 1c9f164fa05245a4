use std::fmt::Write as _;
use std::path::PathBuf;

use privpost::models::TABLE_VARNAMES;
use privpost::oracle::{dirichlet_log_prior, exact_count_posterior, exact_rr_posterior, tv_distance, Binning, GridPosterior, ThetaGrid};

use crate::error::{CliError, CliResult};
use crate::output::{num, read_draws};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleKind {
    /// Records released through randomized response; `--table` holds the
    /// released response-pattern counts.
    Rr,
    /// Cell counts released with discrete Gaussian noise; `--table` holds the
    /// noisy counts.
    Dgauss,
}

#[derive(Clone, Debug, clap::Args)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub kind: OracleKind,
    /// Four values in cell order (1,1), (1,0), (0,1), (0,0).
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub table: Vec<f64>,
    #[arg(long, default_value_t = 0.75, allow_hyphen_values = true)]
    pub keep_prob: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Number of records (dgauss only).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 1.0, 1.0], allow_hyphen_values = true)]
    pub prior: Vec<f64>,
    /// Lattice resolution: points have coordinates (i + 1/4)/m.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Draws CSV to compare against; adds a per-variable marginal TV column.
    #[arg(long)]
    pub draws: Option<PathBuf>,
    /// Bin width for the TV comparison.
    #[arg(long, default_value_t = 0.02, allow_hyphen_values = true)]
    pub width: f64,
}

fn core_error(flag: &str, e: privpost::Error) -> CliError {
    match e {
        privpost::Error::Parameter { name, reason } => CliError::config(format!("--{}", name.replace('_', "-")), reason),
        other => CliError::config(flag, other.to_string()),
    }
}

fn posterior(args: &OracleArgs) -> CliResult<GridPosterior> {
    for (flag, v) in [("--table", &args.table), ("--prior", &args.prior)] {
        if v.len() != 4 {
            return Err(CliError::config(flag, format!("needs 4 comma-separated values, got {}", v.len())));
        }
    }
    if args.prior.iter().any(|&a| !(a > 0.0)) {
        return Err(CliError::config("--prior", "concentrations must be positive"));
    }
    let grid = ThetaGrid::simplex(4, args.grid).map_err(|e| core_error("--grid", e))?;
    let prior = dirichlet_log_prior(&args.prior);
    match args.kind {
        OracleKind::Rr => {
            let mut patterns = Vec::new();
            for (k, &c) in args.table.iter().enumerate() {
                if c < 0.0 || c.fract() != 0.0 {
                    return Err(CliError::config("--table", format!("pattern counts must be whole numbers, got {c}")));
                }
                let bits = vec![u8::from(k < 2), u8::from(k % 2 == 0)];
                patterns.extend(std::iter::repeat_n(bits, c as usize));
            }
            if patterns.is_empty() {
                return Err(CliError::config("--table", "holds no records"));
            }
            exact_rr_posterior(&patterns, args.keep_prob, &grid, prior).map_err(|e| core_error("--table", e))
        }
        OracleKind::Dgauss => {
            let sigma = args.sigma.ok_or_else(|| CliError::config("--sigma", "required for dgauss"))?;
            let n = args.n.ok_or_else(|| CliError::config("--n", "required for dgauss"))?;
            exact_count_posterior(&args.table, sigma, n, &grid, prior).map_err(|e| match e {
                privpost::Error::Capacity(m) => CliError::config("--n", m),
                other => core_error("--table", other),
            })
        }
    }
}

/// `variable,mean,sd` for the exact posterior, plus `tv` when draws are given.
pub fn oracle(args: &OracleArgs) -> CliResult<String> {
    let post = posterior(args)?;
    let weights = post.weights();
    let mean = post.mean();
    let sd: Vec<f64> = (0..4)
        .map(|k| {
            post.grid()
                .iter()
                .zip(&weights)
                .map(|(p, w)| w * (p[k] - mean[k]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let tv = match &args.draws {
        Some(path) => {
            let draws = read_draws(path)?;
            if draws.npar() != 4 {
                return Err(CliError::config("--draws", format!("has {} variables, expected 4", draws.npar())));
            }
            let rows: Vec<Vec<f64>> = (0..draws.nchains())
                .flat_map(|c| (0..draws.ndraws()).map(move |d| (c, d)))
                .map(|(c, d)| draws.row(c, d).to_vec())
                .collect();
            let tv = (0..4)
                .map(|coord| tv_distance(&rows, &post, Binning::Marginal { coord, width: args.width }).map_err(|e| core_error("--width", e)))
                .collect::<CliResult<Vec<f64>>>()?;
            Some(tv)
        }
        None => None,
    };
    let mut out = String::from(if tv.is_some() { "variable,mean,sd,tv\n" } else { "variable,mean,sd\n" });
    for k in 0..4 {
        write!(out, "{},{},{}", TABLE_VARNAMES[k], num(mean[k]), num(sd[k])).expect("writing to a String");
        if let Some(tv) = &tv {
            write!(out, ",{}", num(tv[k])).expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}
