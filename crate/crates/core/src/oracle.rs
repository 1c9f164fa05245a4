//! Brute-force posteriors on parameter grids for tiny instances, used to
//! certify that the sampler targets the exact private posterior.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::DiscreteGaussian;

/// Largest database size accepted by [`exact_count_posterior`].
pub const COUNT_ENUMERATION_CAP: usize = 12;

/// Distinct points on the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaGrid {
    dim: usize,
    points: Vec<f64>,
}

impl ThetaGrid {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim < 2 {
            return Err(Error::Input("grid needs at least one point with two or more coordinates".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Input(format!("grid point {i} has {} coordinates, expected {dim}", p.len())));
            }
            if p.iter().any(|v| !(*v >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Input(format!("grid point {i} is not on the simplex")));
            }
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("grid points are not distinct".into()));
        }
        Ok(Self {
            dim,
            points: points.iter().flatten().copied().collect(),
        })
    }

    /// Interior lattice `θ_k = (i_k + 1/dim) / m` with `Σ i_k = m − 1`:
    /// one point per cell of the regular simplex subdivision at spacing `1/m`.
    pub fn simplex(dim: usize, m: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", "must be at least 2"));
        }
        if m == 0 {
            return Err(Error::param("m", "must be at least 1"));
        }
        let shift = 1.0 / dim as f64;
        let mut points = Vec::new();
        for_each_composition(m - 1, dim, |c| {
            points.extend(c.iter().map(|&i| (i as f64 + shift) / m as f64));
        });
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }
}

/// Calls `f` with every vector of `parts` non-negative integers summing to `total`.
fn for_each_composition(total: usize, parts: usize, mut f: impl FnMut(&[usize])) {
    fn rec(rest: usize, k: usize, buf: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k == 1 {
            buf.push(rest);
            f(buf);
            buf.pop();
            return;
        }
        for v in 0..=rest {
            buf.push(v);
            rec(rest - v, k - 1, buf, f);
            buf.pop();
        }
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut f);
}

/// Normalized log posterior masses on a grid.
#[derive(Clone, Debug)]
pub struct GridPosterior {
    grid: ThetaGrid,
    log_weights: Vec<f64>,
}

impl GridPosterior {
    /// Normalizes unnormalized log masses.
    pub fn from_log_masses(grid: ThetaGrid, mut log_masses: Vec<f64>) -> Result<Self> {
        if log_masses.len() != grid.len() {
            return Err(Error::Input(format!("{} masses for {} grid points", log_masses.len(), grid.len())));
        }
        let lse = log_sum_exp(&log_masses);
        if !lse.is_finite() {
            return Err(Error::Numeric("posterior has no finite mass on the grid".into()));
        }
        for v in &mut log_masses {
            *v -= lse;
        }
        Ok(Self {
            grid,
            log_weights: log_masses,
        })
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|v| v.exp()).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.grid.dim()];
        for (p, w) in self.grid.iter().zip(self.weights()) {
            for (a, b) in m.iter_mut().zip(p) {
                *a += w * b;
            }
        }
        m
    }

    /// `count` i.i.d. grid points drawn with the posterior weights.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let index = WeightedIndex::new(self.weights()).map_err(|e| Error::Numeric(e.to_string()))?;
        Ok((0..count).map(|_| self.grid.point(index.sample(rng)).to_vec()).collect())
    }
}

fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Unnormalized `Dirichlet(α)` log density `Σ (α_k − 1) ln θ_k`.
pub fn dirichlet_log_prior(alpha: &[f64]) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |theta| {
        theta
            .iter()
            .zip(alpha)
            .map(|(t, a)| if *a == 1.0 { 0.0 } else { (a - 1.0) * t.ln() })
            .sum()
    }
}

fn posterior_on_grid(grid: &ThetaGrid, log_prior: &(dyn Fn(&[f64]) -> f64 + Sync), loglik: impl Fn(&[f64]) -> f64 + Sync) -> Result<GridPosterior> {
    let masses: Vec<f64> = grid
        .points
        .par_chunks_exact(grid.dim)
        .map(|p| {
            let lp = log_prior(p);
            if lp == f64::NEG_INFINITY {
                lp
            } else {
                lp + loglik(p)
            }
        })
        .collect();
    GridPosterior::from_log_masses(grid.clone(), masses)
}

/// Response bits of category `c` among `2^bits` categories, ordered so that
/// category 0 is all ones and the last category all zeros.
fn category_bits(c: usize, bits: usize) -> Vec<u8> {
    (0..bits).map(|k| 1 - ((c >> (bits - 1 - k)) & 1) as u8).collect()
}

/// Exact posterior for records released through per-bit randomized response.
///
/// Each record's released pattern has likelihood `Σ_c θ_c η(pattern | c)`;
/// the grid dimension must be `2^bits`.
pub fn exact_rr_posterior(
    patterns: &[Vec<u8>],
    keep_prob: f64,
    grid: &ThetaGrid,
    log_prior: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<GridPosterior> {
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(Error::param("keep_prob", format!("must lie in (0, 1], got {keep_prob}")));
    }
    let bits = patterns.first().map_or(0, Vec::len);
    if bits == 0 || bits > 16 {
        return Err(Error::Input("patterns must have between 1 and 16 bits".into()));
    }
    let ncat = 1usize << bits;
    if grid.dim() != ncat {
        return Err(Error::Input(format!("grid has dimension {}, expected {ncat}", grid.dim())));
    }
    let mut tally: HashMap<&[u8], usize> = HashMap::new();
    for (i, p) in patterns.iter().enumerate() {
        if p.len() != bits || p.iter().any(|b| *b > 1) {
            return Err(Error::Input(format!("pattern {i} is not a {bits}-bit binary vector")));
        }
        *tally.entry(p.as_slice()).or_default() += 1;
    }
    let mut groups: Vec<(Vec<f64>, f64)> = tally
        .into_iter()
        .map(|(p, count)| {
            let eta = (0..ncat)
                .map(|c| {
                    category_bits(c, bits)
                        .iter()
                        .zip(p)
                        .map(|(a, b)| if a == b { keep_prob } else { 1.0 - keep_prob })
                        .product()
                })
                .collect();
            (eta, count as f64)
        })
        .collect();
    groups.sort_by(|a, b| a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    posterior_on_grid(grid, &log_prior, |theta| {
        groups
            .iter()
            .map(|(eta, count)| count * theta.iter().zip(eta).map(|(t, e)| t * e).sum::<f64>().ln())
            .sum()
    })
}

/// Exact posterior for cell counts released with discrete Gaussian noise,
/// marginalizing over every count vector of `n` records.
pub fn exact_count_posterior(
    sdp_counts: &[f64],
    sigma: f64,
    n: usize,
    grid: &ThetaGrid,
    log_prior: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<GridPosterior> {
    if n > COUNT_ENUMERATION_CAP {
        return Err(Error::Capacity(format!("n = {n} exceeds the enumeration cap of {COUNT_ENUMERATION_CAP}")));
    }
    let k = sdp_counts.len();
    if grid.dim() != k {
        return Err(Error::Input(format!("grid has dimension {}, expected {k}", grid.dim())));
    }
    if sdp_counts.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("released counts must be finite".into()));
    }
    let noise = DiscreteGaussian::new(0.0, sigma)?;
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let mut terms: Vec<(Vec<f64>, f64)> = Vec::new();
    for_each_composition(n, k, |c| {
        let mut constant = ln_fact[n];
        for (j, &cj) in c.iter().enumerate() {
            constant += noise.ln_pmf(sdp_counts[j] - cj as f64) - ln_fact[cj];
        }
        if constant > f64::NEG_INFINITY {
            terms.push((c.iter().map(|&v| v as f64).collect(), constant));
        }
    });
    posterior_on_grid(grid, &log_prior, |theta| {
        let ln_theta: Vec<f64> = theta.iter().map(|t| t.ln()).collect();
        let parts: Vec<f64> = terms
            .iter()
            .map(|(c, constant)| {
                constant
                    + c.iter()
                        .zip(&ln_theta)
                        .map(|(cj, lt)| if *cj == 0.0 { 0.0 } else { cj * lt })
                        .sum::<f64>()
            })
            .collect();
        log_sum_exp(&parts)
    })
}

/// How draws and grid mass are grouped before comparing distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Binning {
    /// Bins of `width` along one coordinate.
    Marginal { coord: usize, width: f64 },
    /// Square bins of `width` over two coordinates.
    Joint2 { coords: [usize; 2], width: f64 },
}

impl Binning {
    fn key(&self, p: &[f64]) -> Result<(i64, i64)> {
        let bin = |v: f64, w: f64| (v / w).floor() as i64;
        match *self {
            Binning::Marginal { coord, width } => {
                let v = p.get(coord).ok_or_else(|| Error::Input(format!("coordinate {coord} out of range")))?;
                Ok((bin(*v, width), 0))
            }
            Binning::Joint2 { coords, width } => {
                let a = p.get(coords[0]).ok_or_else(|| Error::Input(format!("coordinate {} out of range", coords[0])))?;
                let b = p.get(coords[1]).ok_or_else(|| Error::Input(format!("coordinate {} out of range", coords[1])))?;
                Ok((bin(*a, width), bin(*b, width)))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let w = match self {
            Binning::Marginal { width, .. } | Binning::Joint2 { width, .. } => *width,
        };
        if w > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(Error::param("width", format!("must be positive, got {w}")))
        }
    }
}

/// Total-variation distance between binned draws and the binned grid posterior.
pub fn tv_distance(draws: &[Vec<f64>], posterior: &GridPosterior, binning: Binning) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Input("no draws".into()));
    }
    binning.validate()?;
    let mut bins: HashMap<(i64, i64), (f64, f64)> = HashMap::new();
    let w = 1.0 / draws.len() as f64;
    for d in draws {
        bins.entry(binning.key(d)?).or_default().0 += w;
    }
    for (p, lw) in posterior.grid().iter().zip(posterior.log_weights()) {
        bins.entry(binning.key(p)?).or_default().1 += lw.exp();
    }
    Ok(0.5 * bins.values().map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Largest one-coordinate marginal TV distance over all coordinates.
pub fn max_marginal_tv(draws: &[Vec<f64>], posterior: &GridPosterior, width: f64) -> Result<f64> {
    (0..posterior.grid().dim())
        .map(|coord| tv_distance(draws, posterior, Binning::Marginal { coord, width }))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}
