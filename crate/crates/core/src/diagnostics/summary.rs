use super::convergence::{ess_bulk_f64, ess_tail_f64, split_rhat_f64};
use crate::engine::DrawsMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Normal-consistency factor applied to the median absolute deviation.
const MAD_SCALE: f64 = 1.4826;

/// One line of a posterior summary table. Diagnostics that cannot be
/// computed (a single chain, constant draws, too few draws) are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow<F = f64> {
    pub variable: String,
    pub mean: F,
    pub median: F,
    pub sd: F,
    pub mad: F,
    pub q5: F,
    pub q95: F,
    pub rhat: Option<F>,
    pub ess_bulk: Option<F>,
    pub ess_tail: Option<F>,
}

/// Summarizes every variable of `draws`.
pub fn summarize<F: Real>(draws: &DrawsMatrix<F>) -> Result<Vec<SummaryRow<F>>> {
    if draws.nchains() == 0 || draws.ndraws() == 0 || draws.npar() == 0 {
        return Err(Error::Input("no draws to summarize".into()));
    }
    (0..draws.npar())
        .map(|k| summarize_chains(&draws.varnames()[k], &draws.variable(k)))
        .collect()
}

/// Summary of one variable given one series per chain.
pub fn summarize_chains<F: Real>(name: &str, chains: &[Vec<F>]) -> Result<SummaryRow<F>> {
    let x: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|v| v.as_f64()).collect()).collect();
    let pooled: Vec<f64> = x.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Err(Error::Input(format!("variable `{name}` has no draws")));
    }
    if x.iter().any(|c| c.len() != x[0].len()) {
        return Err(Error::Input(format!("variable `{name}` has chains of different lengths")));
    }
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("variable `{name}` has non-finite draws")));
    }
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let lit = F::lit;
    Ok(SummaryRow {
        variable: name.to_string(),
        mean: lit(mean),
        median: lit(quantile_sorted(&sorted, 0.5)),
        sd: lit(sd_f64(&pooled, mean)),
        mad: lit(mad_sorted(&sorted)),
        q5: lit(quantile_sorted(&sorted, 0.05)),
        q95: lit(quantile_sorted(&sorted, 0.95)),
        rhat: split_rhat_f64(&x).map(lit),
        ess_bulk: ess_bulk_f64(&x).map(lit),
        ess_tail: ess_tail_f64(&x).map(lit),
    })
}

/// Linear interpolation between order statistics at `h = (N−1)p`.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sd_f64(x: &[f64], mean: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

fn mad_sorted(sorted: &[f64]) -> f64 {
    let m = quantile_sorted(sorted, 0.5);
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - m).abs()).collect();
    dev.sort_by(f64::total_cmp);
    MAD_SCALE * quantile_sorted(&dev, 0.5)
}

fn sorted_f64<F: Real>(x: &[F]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Input("empty sample".into()));
    }
    let mut s: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    if s.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("sample contains NaN".into()));
    }
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Sample quantile, `p ∈ [0, 1]`.
pub fn quantile<F: Real>(x: &[F], p: F) -> Result<F> {
    let p = p.as_f64();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
    }
    Ok(F::lit(quantile_sorted(&sorted_f64(x)?, p)))
}

pub fn median<F: Real>(x: &[F]) -> Result<F> {
    quantile(x, F::lit(0.5))
}

/// Sample standard deviation with the `N − 1` denominator.
pub fn sd<F: Real>(x: &[F]) -> Result<F> {
    if x.is_empty() {
        return Err(Error::Input("empty sample".into()));
    }
    let v: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Ok(F::lit(sd_f64(&v, mean)))
}

/// Median absolute deviation scaled by 1.4826.
pub fn mad<F: Real>(x: &[F]) -> Result<F> {
    Ok(F::lit(mad_sorted(&sorted_f64(x)?)))
}
