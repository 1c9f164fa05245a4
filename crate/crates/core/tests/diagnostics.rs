use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use privpost::diagnostics::{
    ess_bulk, ess_tail, fraction_missing_info, lag1_autocorrelation, mad, median, quantile, sd, split_rhat,
    summarize_chains, toy_model_chain,
};

fn normal_chains(chains: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..chains)
        .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn ar1_chains(chains: usize, len: usize, phi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1.0 - phi * phi).sqrt();
    (0..chains)
        .map(|_| {
            let mut x: f64 = StandardNormal.sample(&mut rng);
            (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = phi * x + scale * z;
                    x
                })
                .collect()
        })
        .collect()
}

#[test]
fn iid_normal_summary() {
    let chains = normal_chains(4, 5000, 1);
    let row = summarize_chains("x", &chains).unwrap();
    assert!(row.mean.abs() < 0.05);
    assert!((row.sd - 1.0).abs() < 0.03);
    assert!((row.mad - 1.0).abs() < 0.05);
    assert!((row.q5 + 1.645).abs() < 0.06);
    assert!((row.q95 - 1.645).abs() < 0.06);
    assert!((row.rhat.unwrap() - 1.0).abs() < 0.01);
    let bulk = row.ess_bulk.unwrap();
    assert!((0.8 * 20_000.0..=1.2 * 20_000.0).contains(&bulk), "{bulk}");
    assert!(row.ess_tail.unwrap() > 0.5 * 20_000.0);
}

#[test]
fn ar1_effective_sample_size() {
    let chains = ar1_chains(4, 5000, 0.5, 2);
    let ratio = ess_bulk(&chains).unwrap() / 20_000.0;
    assert!((ratio - 1.0 / 3.0).abs() < 0.2 / 3.0, "{ratio}");
}

#[test]
fn ess_never_exceeds_cap() {
    // Anticorrelated draws push the naive estimate above the draw count.
    let chains = ar1_chains(4, 1000, -0.7, 3);
    let cap = 1.5 * 4000.0;
    assert!(ess_bulk(&chains).unwrap() <= cap + 1e-9);
    assert!(ess_tail(&chains).unwrap() <= cap + 1e-9);
}

#[test]
fn rhat_flags_separated_chains() {
    let mut chains = normal_chains(4, 1000, 4);
    for v in chains[0].iter_mut() {
        *v += 5.0;
    }
    assert!(split_rhat(&chains).unwrap() > 1.5);
    assert!(split_rhat(&normal_chains(1, 1000, 5)).is_none());
    assert!(split_rhat(&[vec![1.0; 100], vec![1.0; 100]]).is_none());
}

#[test]
fn lag1_autocorrelation_values() {
    let iid = normal_chains(1, 20_000, 6).remove(0);
    assert!(lag1_autocorrelation(&iid).unwrap().abs() < 0.03);
    let ar = ar1_chains(1, 20_000, 0.8, 7).remove(0);
    assert!((lag1_autocorrelation(&ar).unwrap() - 0.8).abs() < 0.03);
    assert_eq!(lag1_autocorrelation(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
    assert!(lag1_autocorrelation(&[1.0, 2.0]).is_err());
}

#[test]
fn toy_chain_mixing() {
    let (epsilon, sigma, s) = (0.5, 1.0, 0.3);
    let gamma = fraction_missing_info(epsilon, sigma).unwrap();
    assert_relative_eq!(gamma, 0.8, epsilon = 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let chain = toy_model_chain(epsilon, sigma, s, 200_000, &mut rng).unwrap();
    let m = chain.iter().sum::<f64>() / chain.len() as f64;
    // θ | s ~ N(s, σ² + ε⁻²) = N(0.3, 5); the chain's lag-one correlation is γ
    assert!((m - s).abs() < 0.1, "{m}");
    assert!((sd(&chain).unwrap().powi(2) - 5.0).abs() < 0.3);
    assert!((lag1_autocorrelation(&chain).unwrap() - gamma).abs() < 0.01);
    assert!(fraction_missing_info(0.0, 1.0).is_err());
    assert!(toy_model_chain(1.0, 1.0, 0.0, 0, &mut rng).is_err());
}

#[test]
fn quantile_conventions() {
    let x = [4.0, 1.0, 3.0, 2.0];
    assert_eq!(median(&x).unwrap(), 2.5);
    assert_relative_eq!(quantile(&x, 0.05).unwrap(), 1.15, epsilon = 1e-12);
    assert_eq!(quantile(&x, 1.0).unwrap(), 4.0);
    assert_relative_eq!(sd(&x).unwrap(), (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
    assert_relative_eq!(mad(&x).unwrap(), 1.4826, epsilon = 1e-12);
    assert!(quantile(&x, 1.5).is_err());
    assert!(median::<f64>(&[]).is_err());
}

#[test]
fn f32_summaries() {
    let chains: Vec<Vec<f32>> = normal_chains(2, 500, 9)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f32).collect())
        .collect();
    let row = summarize_chains("x", &chains).unwrap();
    assert!(row.rhat.unwrap() < 1.05f32);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chain_permutation_invariance(seed in 0u64..1000) {
        let chains = normal_chains(3, 200, seed);
        let mut rev = chains.clone();
        rev.reverse();
        let a = summarize_chains("x", &chains).unwrap();
        let b = summarize_chains("x", &rev).unwrap();
        prop_assert!((a.rhat.unwrap() - b.rhat.unwrap()).abs() < 1e-12);
        prop_assert!((a.ess_bulk.unwrap() - b.ess_bulk.unwrap()).abs() < 1e-9);
        prop_assert!((a.mean - b.mean).abs() < 1e-12);
    }

    #[test]
    fn affine_equivariance(seed in 0u64..1000, shift in -10.0..10.0f64, scale in 0.1..10.0f64) {
        let chains = normal_chains(2, 200, seed);
        let moved: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|v| shift + scale * v).collect()).collect();
        let a = summarize_chains("x", &chains).unwrap();
        let b = summarize_chains("x", &moved).unwrap();
        prop_assert!((b.mean - (shift + scale * a.mean)).abs() < 1e-9);
        prop_assert!((b.sd - scale * a.sd).abs() < 1e-9);
        prop_assert!((b.q95 - (shift + scale * a.q95)).abs() < 1e-9);
        // rounding can swap near-tied folded ranks, so the tail R-hat is only close
        prop_assert!((a.rhat.unwrap() - b.rhat.unwrap()).abs() < 1e-3);
        prop_assert!((a.ess_bulk.unwrap() - b.ess_bulk.unwrap()).abs() < 1e-6);
    }
}
