use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use super::model::{PrivacyModel, SimRng};
use super::types::{DrawsMatrix, LatentDatabase, RecordStatistic, SamplerConfig, SamplerOutput, SummaryValue};
use crate::error::{Error, Result};

/// Relative tolerance for the cached-total coherence check.
pub const COHERENCE_TOLERANCE: f64 = 1e-10;

/// Called with `(chain, completed iterations)`.
pub type ProgressHook = dyn Fn(usize, usize) + Send + Sync;

/// Execution knobs that do not affect the draws.
pub struct RunOptions<'a> {
    /// Worker threads for chains; `None` uses the global pool.
    pub threads: Option<usize>,
    pub progress: Option<&'a ProgressHook>,
    pub progress_every: usize,
    /// Recompute the running statistic from scratch every `k` iterations and
    /// fail if the cached total has drifted.
    pub coherence_check_every: Option<usize>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        Self {
            threads: None,
            progress: None,
            progress_every: 100,
            coherence_check_every: None,
        }
    }
}

/// Retained draw rows (`(niter - warmup) × npar`, row-major) and per-iteration
/// mean acceptance probabilities for one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDraws {
    pub draws: Vec<f64>,
    pub acceptance: Vec<f64>,
}

/// `min(1, exp(new - old))`. Two impossible states give 1 so the chain can
/// leave a zero-density start.
pub fn mh_accept_logratio(log_eta_new: f64, log_eta_old: f64) -> Result<f64> {
    if log_eta_new.is_nan() || log_eta_old.is_nan() {
        return Err(Error::Numeric("NaN log-density in acceptance ratio".into()));
    }
    if log_eta_old == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if log_eta_new == f64::INFINITY {
        return Ok(1.0);
    }
    Ok((log_eta_new - log_eta_old).exp().min(1.0))
}

/// The random stream for `chain`: a ChaCha stream selected by chain index
/// under a key derived from `seed`, so draws do not depend on scheduling.
pub fn chain_rng(seed: u64, chain: usize) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// `Σ_i t_i(x_i, s_dp)` computed from scratch.
pub fn recompute_statistic<M: PrivacyModel + ?Sized>(
    model: &M,
    data: &LatentDatabase,
    sdp: &SummaryValue,
) -> Result<SummaryValue> {
    let mut total = SummaryValue::zeros(sdp.shape());
    let mut stat = RecordStatistic::new(sdp.shape());
    for (i, row) in data.rows().enumerate() {
        model
            .record_statistic(row, sdp, i, &mut stat)
            .and_then(|_| check_statistic(&stat, sdp))
            .map_err(|e| e.at_record(i))?;
        stat.add_to(&mut total, 1.0);
    }
    Ok(total)
}

fn check_statistic(stat: &RecordStatistic, sdp: &SummaryValue) -> Result<()> {
    if stat.shape() != sdp.shape() {
        return Err(Error::Input(format!(
            "record statistic has shape {:?}, released statistic {:?}",
            stat.shape(),
            sdp.shape()
        )));
    }
    stat.validate(sdp.len())
}

/// Net `(index, new - old)` changes, merged per index.
fn merge_deltas(old: &RecordStatistic, new: &RecordStatistic, out: &mut Vec<(usize, f64)>) {
    out.clear();
    out.extend(new.entries().iter().copied());
    out.extend(old.entries().iter().map(|&(j, v)| (j, -v)));
    out.sort_unstable_by_key(|e| e.0);
    let mut w = 0;
    for r in 0..out.len() {
        if w > 0 && out[w - 1].0 == out[r].0 {
            out[w - 1].1 += out[r].1;
        } else {
            out[w] = out[r];
            w += 1;
        }
    }
    out.truncate(w);
    out.retain(|e| e.1 != 0.0);
}

/// One Metropolis-within-Gibbs pass over the records `i = 0..n` in order.
///
/// Each record gets an independence proposal from `f(· | θ)`; the running
/// total is patched with the record's old and new contributions and the move
/// is accepted with the mechanism density ratio. `data` and `total` are
/// updated in place. Returns the mean acceptance probability of the pass.
pub fn sweep_latent<M: PrivacyModel + ?Sized>(
    model: &M,
    data: &mut LatentDatabase,
    theta: &[f64],
    sdp: &SummaryValue,
    total: &mut SummaryValue,
    rng: &mut SimRng,
) -> Result<f64> {
    let n = data.nrows();
    let shape = sdp.shape();
    if total.shape() != shape {
        return Err(Error::Input(format!(
            "running total has shape {:?}, released statistic {:?}",
            total.shape(),
            shape
        )));
    }
    let separable = !total.is_empty()
        && model
            .coordinate_logdensity(sdp, 0, total.as_slice()[0])
            .is_some();

    let mut log_cur = model.privacy_logdensity(sdp, total)?;
    if log_cur.is_nan() {
        return Err(Error::Numeric("privacy log-density is NaN at the current state".into()));
    }

    let mut proposal = vec![0.0; data.ncols()];
    let mut old_stat = RecordStatistic::new(shape);
    let mut new_stat = RecordStatistic::new(shape);
    let mut deltas = Vec::new();
    let mut candidate = SummaryValue::zeros(shape);
    let mut alpha_sum = 0.0;

    for i in 0..n {
        let step = |e: Error| e.at_record(i);
        model.propose_record(theta, rng, &mut proposal).map_err(step)?;
        if proposal.iter().any(|v| !v.is_finite()) {
            return Err(step(Error::Numeric("proposed record is not finite".into())));
        }
        model
            .record_statistic(data.row(i), sdp, i, &mut old_stat)
            .and_then(|_| check_statistic(&old_stat, sdp))
            .map_err(step)?;
        model
            .record_statistic(&proposal, sdp, i, &mut new_stat)
            .and_then(|_| check_statistic(&new_stat, sdp))
            .map_err(step)?;
        merge_deltas(&old_stat, &new_stat, &mut deltas);

        let log_new = if separable && log_cur.is_finite() {
            let cur = total.as_slice();
            let mut change = 0.0;
            for &(j, dv) in &deltas {
                let before = model.coordinate_logdensity(sdp, j, cur[j]);
                let after = model.coordinate_logdensity(sdp, j, cur[j] + dv);
                match (before, after) {
                    (Some(b), Some(a)) => change += a - b,
                    _ => return Err(step(Error::Numeric("coordinate log-density unavailable".into()))),
                }
            }
            log_cur + change
        } else {
            candidate.as_mut_slice().copy_from_slice(total.as_slice());
            let c = candidate.as_mut_slice();
            for &(j, dv) in &deltas {
                c[j] += dv;
            }
            model.privacy_logdensity(sdp, &candidate).map_err(step)?
        };

        let alpha = mh_accept_logratio(log_new, log_cur).map_err(step)?;
        alpha_sum += alpha;
        let u: f64 = rng.random();
        if u < alpha {
            let t = total.as_mut_slice();
            for &(j, dv) in &deltas {
                t[j] += dv;
            }
            data.row_mut(i).copy_from_slice(&proposal);
            log_cur = log_new;
        }
    }
    Ok(alpha_sum / n as f64)
}

fn relative_gap(a: &SummaryValue, b: &SummaryValue) -> f64 {
    let scale = b.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

/// Runs chain `chain` of `config` on its own derived stream.
pub fn sample_chain<M: PrivacyModel + ?Sized>(
    model: &M,
    sdp: &SummaryValue,
    config: &SamplerConfig,
    chain: usize,
    options: &RunOptions<'_>,
) -> Result<ChainDraws> {
    config.validate()?;
    let npar = model.npar();
    if config.init_par.len() != npar {
        return Err(Error::Config(format!(
            "init_par has length {}, model expects {npar}",
            config.init_par.len()
        )));
    }
    if !sdp.is_finite() {
        return Err(Error::Config("released statistic has non-finite entries".into()));
    }
    let mut rng = chain_rng(config.seed, chain);

    let mut data = model
        .sample_latent(&config.init_par, &mut rng)
        .map_err(|e| Error::Config(format!("latent sampler failed at init_par: {e}")))?;
    let (n, p) = (data.nrows(), data.ncols());
    let mut total = recompute_statistic(model, &data, sdp)
        .map_err(|e| Error::Config(format!("record statistic incompatible with released statistic: {e}")))?;

    let mut theta = config.init_par.clone();
    let mut draws = Vec::with_capacity(config.retained() * npar);
    let mut acceptance = Vec::with_capacity(config.niter);

    for iter in 0..config.niter {
        theta = model.posterior_step(&data, &theta, &mut rng)?;
        if theta.len() != npar {
            return Err(Error::Input(format!(
                "posterior step returned {} parameters, expected {npar}",
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("posterior step produced a non-finite draw at iteration {iter}")));
        }
        debug_assert_eq!((data.nrows(), data.ncols()), (n, p));
        let alpha = sweep_latent(model, &mut data, &theta, sdp, &mut total, &mut rng)?;
        acceptance.push(alpha);
        if iter >= config.warmup {
            draws.extend_from_slice(&theta);
        }
        if let Some(k) = options.coherence_check_every {
            if k > 0 && (iter + 1) % k == 0 {
                let fresh = recompute_statistic(model, &data, sdp)?;
                let gap = relative_gap(&total, &fresh);
                if gap > COHERENCE_TOLERANCE {
                    return Err(Error::Numeric(format!(
                        "cached statistic drifted from recomputation by {gap:e} at iteration {iter}"
                    )));
                }
            }
        }
        if let Some(hook) = options.progress {
            if options.progress_every > 0 && ((iter + 1) % options.progress_every == 0 || iter + 1 == config.niter) {
                hook(chain, iter + 1);
            }
        }
    }
    Ok(ChainDraws { draws, acceptance })
}

pub fn sample_private_posterior<M: PrivacyModel + ?Sized>(
    model: &M,
    sdp: &SummaryValue,
    config: &SamplerConfig,
) -> Result<SamplerOutput> {
    sample_private_posterior_with(model, sdp, config, &RunOptions::default())
}

/// Runs `config.chains` independent chains, in parallel where allowed, and
/// stacks them in chain order.
pub fn sample_private_posterior_with<M: PrivacyModel + ?Sized>(
    model: &M,
    sdp: &SummaryValue,
    config: &SamplerConfig,
    options: &RunOptions<'_>,
) -> Result<SamplerOutput> {
    config.validate()?;
    let varnames = model.varnames();
    if varnames.len() != model.npar() {
        return Err(Error::Config(format!(
            "model declares {} parameters but {} names",
            model.npar(),
            varnames.len()
        )));
    }
    let run = |c: usize| sample_chain(model, sdp, config, c, options).map_err(|e| e.in_chain(c));
    let results: Vec<Result<ChainDraws>> = match options.threads {
        Some(1) => (0..config.chains).map(run).collect(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(|| (0..config.chains).into_par_iter().map(run).collect()),
        None => (0..config.chains).into_par_iter().map(run).collect(),
    };

    let mut per_chain = Vec::with_capacity(config.chains);
    let mut acceptance = Vec::with_capacity(config.chains);
    for r in results {
        let c = r?;
        per_chain.push(c.draws);
        acceptance.push(c.acceptance);
    }
    Ok(SamplerOutput {
        draws: DrawsMatrix::from_chains(varnames, per_chain)?,
        acceptance,
    })
}
