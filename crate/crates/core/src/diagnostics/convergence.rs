use statrs::distribution::{ContinuousCDF, Normal};

use super::summary::quantile_sorted;
use crate::scalar::Real;

/// Largest effective sample size reported, relative to the draw count.
const ESS_CAP: f64 = 1.5;

fn to_f64<F: Real>(chains: &[Vec<F>]) -> Vec<Vec<f64>> {
    chains.iter().map(|c| c.iter().map(|v| v.as_f64()).collect()).collect()
}

fn usable(chains: &[Vec<f64>]) -> bool {
    let Some(first) = chains.first() else { return false };
    !first.is_empty()
        && chains.iter().all(|c| c.len() == first.len() && c.iter().all(|v| v.is_finite()))
}

fn is_constant(chains: &[Vec<f64>]) -> bool {
    let x0 = chains[0][0];
    chains.iter().flatten().all(|&v| v == x0)
}

/// Splits each chain into halves, dropping the last draw when the length is odd.
fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let half = chains[0].len() / 2;
    chains
        .iter()
        .flat_map(|c| [c[..half].to_vec(), c[half..2 * half].to_vec()])
        .collect()
}

/// Average-rank normal scores `Φ⁻¹((r − 3/8) / (S + 1/4))` over the pooled draws.
pub fn rank_normalize<F: Real>(chains: &[Vec<F>]) -> Vec<Vec<F>> {
    rank_normalize_f64(&to_f64(chains))
        .into_iter()
        .map(|c| c.into_iter().map(F::lit).collect())
        .collect()
}

pub(crate) fn rank_normalize_f64(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    let s = pooled.len();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; s];
    let mut i = 0;
    while i < s {
        let mut j = i;
        while j + 1 < s && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let normal = Normal::standard();
    let mut it = ranks.into_iter().map(|r| normal.inverse_cdf((r - 0.375) / (s as f64 + 0.25)));
    chains.iter().map(|c| it.by_ref().take(c.len()).collect()).collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// `√((W(n−1)/n + B/n) / W)` on already split chains.
fn rhat_basic(chains: &[Vec<f64>]) -> Option<f64> {
    let n = chains[0].len();
    if n < 2 || chains.len() < 2 {
        return None;
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = mean(&chains.iter().map(|c| var(c)).collect::<Vec<_>>());
    let b = n as f64 * var(&means);
    if w == 0.0 {
        return if b > 0.0 { Some(f64::INFINITY) } else { None };
    }
    let n = n as f64;
    Some(((w * (n - 1.0) / n + b / n) / w).sqrt())
}

/// Split-chain rank-normalized potential scale reduction: the larger of the
/// bulk value and the value for draws folded around the median.
pub fn split_rhat<F: Real>(chains: &[Vec<F>]) -> Option<F> {
    split_rhat_f64(&to_f64(chains)).map(F::lit)
}

pub(crate) fn split_rhat_f64(chains: &[Vec<f64>]) -> Option<f64> {
    if chains.len() < 2 || !usable(chains) || chains[0].len() < 4 {
        return None;
    }
    let split = split_chains(chains);
    if is_constant(&split) {
        return None;
    }
    let bulk = rhat_basic(&rank_normalize_f64(&split))?;
    let mut sorted: Vec<f64> = split.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let med = quantile_sorted(&sorted, 0.5);
    let folded: Vec<Vec<f64>> = split.iter().map(|c| c.iter().map(|v| (v - med).abs()).collect()).collect();
    let tail = if is_constant(&folded) {
        bulk
    } else {
        rhat_basic(&rank_normalize_f64(&folded))?
    };
    Some(bulk.max(tail))
}

/// Biased autocovariances of one chain, extended on demand.
struct Autocov<'a> {
    x: &'a [f64],
    mean: f64,
    acov: Vec<f64>,
}

impl<'a> Autocov<'a> {
    fn new(x: &'a [f64]) -> Self {
        Self {
            x,
            mean: mean(x),
            acov: Vec::new(),
        }
    }

    fn at(&mut self, lag: usize) -> f64 {
        let n = self.x.len();
        while self.acov.len() <= lag {
            let l = self.acov.len();
            let s: f64 = (0..n - l).map(|t| (self.x[t] - self.mean) * (self.x[t + l] - self.mean)).sum();
            self.acov.push(s / n as f64);
        }
        self.acov[lag]
    }
}

/// Multi-chain effective sample size with Geyer's initial positive and
/// initial monotone sequence truncation.
fn ess_raw(chains: &[Vec<f64>]) -> Option<f64> {
    let m = chains.len();
    let n = chains[0].len();
    if n < 3 || is_constant(chains) {
        return None;
    }
    let mut ac: Vec<Autocov> = chains.iter().map(|c| Autocov::new(c)).collect();
    let chain_var: Vec<f64> = ac.iter_mut().map(|a| a.at(0) * n as f64 / (n - 1) as f64).collect();
    let mean_var = mean(&chain_var);
    let mut var_plus = mean_var * (n - 1) as f64 / n as f64;
    if m > 1 {
        var_plus += var(&chains.iter().map(|c| mean(c)).collect::<Vec<_>>());
    }
    let rho_at = |lag: usize, ac: &mut Vec<Autocov>| {
        let mean_acov = ac.iter_mut().map(|a| a.at(lag)).sum::<f64>() / m as f64;
        1.0 - (mean_var - mean_acov) / var_plus
    };
    let mut rho = vec![0.0; n];
    rho[0] = 1.0;
    let mut even = 1.0;
    let mut odd = rho_at(1, &mut ac);
    rho[1] = odd;
    let mut t = 0;
    while t + 5 < n && (even + odd).is_finite() && even + odd > 0.0 {
        t += 2;
        even = rho_at(t, &mut ac);
        odd = rho_at(t + 1, &mut ac);
        if even + odd >= 0.0 {
            rho[t] = even;
            rho[t + 1] = odd;
        }
    }
    let max_t = t;
    if even > 0.0 {
        rho[max_t] = even;
    }
    let mut t = 0;
    while t + 4 <= max_t {
        t += 2;
        let prev = rho[t - 2] + rho[t - 1];
        if rho[t] + rho[t + 1] > prev {
            rho[t] = prev / 2.0;
            rho[t + 1] = rho[t];
        }
    }
    let total = (m * n) as f64;
    let tau = -1.0 + 2.0 * rho[..max_t].iter().sum::<f64>() + rho[max_t];
    let tau = tau.max(1.0 / total.log10()).max(1.0 / ESS_CAP);
    Some(total / tau)
}

/// Bulk effective sample size: rank-normalized split chains.
pub fn ess_bulk<F: Real>(chains: &[Vec<F>]) -> Option<F> {
    ess_bulk_f64(&to_f64(chains)).map(F::lit)
}

pub(crate) fn ess_bulk_f64(chains: &[Vec<f64>]) -> Option<f64> {
    if !usable(chains) || chains[0].len() < 4 {
        return None;
    }
    let split = split_chains(chains);
    if is_constant(&split) {
        return None;
    }
    ess_raw(&rank_normalize_f64(&split))
}

/// Tail effective sample size: the smaller of the values for the 5% and 95%
/// quantile indicators on split chains.
pub fn ess_tail<F: Real>(chains: &[Vec<F>]) -> Option<F> {
    ess_tail_f64(&to_f64(chains)).map(F::lit)
}

pub(crate) fn ess_tail_f64(chains: &[Vec<f64>]) -> Option<f64> {
    if !usable(chains) || chains[0].len() < 4 {
        return None;
    }
    let split = split_chains(chains);
    let mut sorted: Vec<f64> = split.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let indicator = |q: f64| -> Vec<Vec<f64>> {
        split
            .iter()
            .map(|c| c.iter().map(|&v| if v <= q { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let lo = ess_raw(&indicator(quantile_sorted(&sorted, 0.05)))?;
    let hi = ess_raw(&indicator(quantile_sorted(&sorted, 0.95)))?;
    Some(lo.min(hi))
}
