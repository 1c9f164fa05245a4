use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use privpost::mechanisms::{DiscreteGaussian, DiscreteLaplace, Laplace};

use crate::error::{CliError, CliResult};
use crate::output::num;

/// Largest support a pmf listing may cover.
const MAX_SUPPORT: i64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mechanism {
    /// Discrete Gaussian on the integers (`--sigma`, `--mu`).
    Dgauss,
    /// Discrete Laplace on the integers (`--t`).
    Dlaplace,
    /// Continuous Laplace (`--scale`, `--location`); sampling only.
    Laplace,
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct MechParams {
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub scale: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub location: f64,
}

fn required(value: Option<f64>, flag: &str, mech: &str) -> CliResult<f64> {
    value.ok_or_else(|| CliError::config(flag, format!("required for {mech}")))
}

fn param_error(e: privpost::Error) -> CliError {
    match e {
        privpost::Error::Parameter { name, reason } => CliError::config(format!("--{name}"), reason),
        other => CliError::config("mechanism", other.to_string()),
    }
}

enum Discrete {
    Gauss(DiscreteGaussian<f64>),
    Laplace(DiscreteLaplace<f64>),
}

impl Discrete {
    fn pmf(&self, x: i64) -> f64 {
        match self {
            Discrete::Gauss(d) => d.pmf(x as f64),
            Discrete::Laplace(d) => d.pmf(x as f64),
        }
    }
}

fn discrete(mech: Mechanism, p: &MechParams) -> CliResult<Option<Discrete>> {
    Ok(match mech {
        Mechanism::Dgauss => Some(Discrete::Gauss(
            DiscreteGaussian::new(p.mu, required(p.sigma, "--sigma", "dgauss")?).map_err(param_error)?,
        )),
        Mechanism::Dlaplace => Some(Discrete::Laplace(
            DiscreteLaplace::new(required(p.t, "--t", "dlaplace")?).map_err(param_error)?,
        )),
        Mechanism::Laplace => None,
    })
}

/// `x,pmf` rows over the smallest symmetric window around the mode holding
/// at least `1 - tail` of the mass.
pub fn pmf(mech: Mechanism, p: &MechParams, tail: f64) -> CliResult<String> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(CliError::config("--tail", format!("must lie in (0, 1), got {tail}")));
    }
    let Some(dist) = discrete(mech, p)? else {
        return Err(CliError::config("mechanism", "laplace is continuous and has no pmf; use `mech sample`"));
    };
    let center = match mech {
        Mechanism::Dgauss => p.mu.round() as i64,
        _ => 0,
    };
    let mut mass = dist.pmf(center);
    let mut w = 0;
    while mass < 1.0 - tail {
        w += 1;
        if w > MAX_SUPPORT {
            return Err(CliError::config("mechanism", format!("support wider than {MAX_SUPPORT} points")));
        }
        mass += dist.pmf(center - w) + dist.pmf(center + w);
    }
    let mut out = String::from("x,pmf\n");
    for x in center - w..=center + w {
        writeln!(out, "{x},{}", num(dist.pmf(x))).expect("writing to a String");
    }
    Ok(out)
}

/// One draw per row under a `draw` header; nothing at all when `count` is 0.
pub fn sample(mech: Mechanism, p: &MechParams, count: usize, seed: u64) -> CliResult<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<String> = match discrete(mech, p)? {
        Some(Discrete::Gauss(d)) => d.sample_n(count, &mut rng).iter().map(i64::to_string).collect(),
        Some(Discrete::Laplace(d)) => d.sample_n(count, &mut rng).iter().map(i64::to_string).collect(),
        None => {
            let d = Laplace::new(p.location, required(p.scale, "--scale", "laplace")?).map_err(param_error)?;
            (0..count).map(|_| num(d.sample(&mut rng))).collect()
        }
    };
    if rows.is_empty() {
        return Ok(String::new());
    }
    let mut out = String::from("draw\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
