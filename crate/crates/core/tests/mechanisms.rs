use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use privpost::mechanisms::{
    ddlaplace, ddnorm, laplace_logdensity, laplace_mechanism, randomized_response, rdlaplace, rdnorm, rr_loglik,
    sigma_for_approx_dp, zcdp_epsilon, DiscreteGaussian, DiscreteLaplace, PrivacyBudget, RandomizedResponse,
};
use privpost::Error;

/// Discrete Gaussian mass by direct summation over a wide window.
fn dgauss_oracle(x: i64, mu: f64, sigma: f64) -> f64 {
    let half = (60.0 * sigma).ceil() as i64 + 5;
    let c = mu.round() as i64;
    let w = |k: i64| (-((k as f64 - mu).powi(2)) / (2.0 * sigma * sigma)).exp();
    w(x) / (c - half..=c + half).map(w).sum::<f64>()
}

fn dlaplace_oracle(x: i64, t: f64) -> f64 {
    let w = |k: i64| (-(k.abs() as f64) / t).exp();
    let half = (80.0 * t).ceil() as i64 + 5;
    w(x) / (-half..=half).map(w).sum::<f64>()
}

fn mean_var(xs: &[i64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().map(|&v| v as f64).sum::<f64>() / n;
    let v = xs.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn dgauss_mass_at_mode() {
    let p = ddnorm(0.0f64, 0.0, 1.0, false).unwrap();
    assert_abs_diff_eq!(p, 0.3989423, epsilon = 1e-6);
    assert_abs_diff_eq!(p, dgauss_oracle(0, 0.0, 1.0), epsilon = 1e-15);
}

#[test]
fn dgauss_matches_summation_oracle() {
    for &(mu, sigma) in &[(0.0, 0.3), (1.25, 1.0), (-7.5, 6.32), (3.9, 15.0)] {
        let d = DiscreteGaussian::new(mu, sigma).unwrap();
        for x in -30..=30 {
            assert_abs_diff_eq!(d.pmf(x as f64), dgauss_oracle(x, mu, sigma), epsilon = 1e-14);
        }
    }
}

#[test]
fn dgauss_rejects_bad_parameters() {
    assert!(matches!(DiscreteGaussian::new(0.0, 0.0), Err(Error::Parameter { .. })));
    assert!(matches!(DiscreteGaussian::new(0.0, -1.0), Err(Error::Parameter { .. })));
    assert!(DiscreteGaussian::new(f64::NAN, 1.0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(rdnorm(3, 0.0, 0.0, &mut rng).is_err());
    assert!(rdnorm(0, 0.0, 1.0, &mut rng).unwrap().is_empty());
}

#[test]
fn dgauss_sampler_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = rdnorm(1_000_000, 0.0, 6.32, &mut rng).unwrap();
    let (m, v) = mean_var(&draws);
    let oracle_var: f64 = (-300..=300).map(|x| (x * x) as f64 * dgauss_oracle(x, 0.0, 6.32)).sum();
    assert!(m.abs() < 0.03, "mean {m}");
    assert!((v / oracle_var - 1.0).abs() < 0.02, "var {v} vs {oracle_var}");

    let draws = rdnorm(1_000_000, 0.0, 1.0, &mut rng).unwrap();
    let p0 = draws.iter().filter(|&&x| x == 0).count() as f64 / 1e6;
    assert_abs_diff_eq!(p0, 0.39894, epsilon = 0.002);
}

#[test]
fn dgauss_sampler_fractional_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = rdnorm(200_000, 2.5, 0.4, &mut rng).unwrap();
    let p2 = draws.iter().filter(|&&x| x == 2).count() as f64 / 2e5;
    let p3 = draws.iter().filter(|&&x| x == 3).count() as f64 / 2e5;
    assert_abs_diff_eq!(p2, dgauss_oracle(2, 2.5, 0.4), epsilon = 0.005);
    assert_abs_diff_eq!(p3, dgauss_oracle(3, 2.5, 0.4), epsilon = 0.005);
}

#[test]
fn dlaplace_mass_at_zero() {
    let p = ddlaplace(0.0f64, 1.0, false).unwrap();
    let e = std::f64::consts::E;
    assert_abs_diff_eq!(p, (e - 1.0) / (e + 1.0), epsilon = 1e-12);
    assert_abs_diff_eq!(p, 0.4621172, epsilon = 1e-7);
    for x in -20..=20 {
        assert_abs_diff_eq!(ddlaplace(x as f64, 2.0, false).unwrap(), dlaplace_oracle(x, 2.0), epsilon = 1e-14);
    }
    assert!(ddlaplace(0.0f64, 0.0, false).is_err());
}

#[test]
fn dlaplace_sampler_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = rdlaplace(1_000_000, 1.0, &mut rng).unwrap();
    let p0 = draws.iter().filter(|&&x| x == 0).count() as f64 / 1e6;
    assert_abs_diff_eq!(p0, 0.46212, epsilon = 0.002);

    let draws = rdlaplace(1_000_000, 2.0, &mut rng).unwrap();
    let (_, v) = mean_var(&draws);
    let oracle_var: f64 = (-400..=400).map(|x| (x * x) as f64 * dlaplace_oracle(x, 2.0)).sum();
    assert!((v / oracle_var - 1.0).abs() < 0.02, "var {v} vs {oracle_var}");
}

#[test]
fn laplace_density_and_mechanism() {
    let v = laplace_logdensity(1.5f64, 0.0, 1.5).unwrap();
    assert_abs_diff_eq!(v, (1.0f64 / 3.0).ln() - 1.0, epsilon = 1e-14);
    assert!(laplace_logdensity(0.0f64, 0.0, 0.0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let zeros = vec![0.0f64; 1_000_000];
    let noisy = laplace_mechanism(&zeros, 1.0, 1.0, &mut rng).unwrap();
    let var = noisy.iter().map(|v| v * v).sum::<f64>() / noisy.len() as f64;
    assert_abs_diff_eq!(var, 2.0, epsilon = 0.02);
    assert!(laplace_mechanism(&zeros[..1], 1.0, 0.0, &mut rng).is_err());
}

#[test]
fn randomized_response_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rr = RandomizedResponse::<f64>::two_coin();
    assert_eq!(rr.keep_prob(), 0.75);
    let ones = vec![1u8; 1_000_000];
    let out = randomized_response(&ones, &rr, &mut rng).unwrap();
    let kept = out.iter().filter(|&&b| b == 1).count() as f64 / 1e6;
    assert_abs_diff_eq!(kept, 0.75, epsilon = 0.001);
    let zeros = vec![0u8; 1_000_000];
    let out = randomized_response(&zeros, &rr, &mut rng).unwrap();
    let flipped = out.iter().filter(|&&b| b == 1).count() as f64 / 1e6;
    assert_abs_diff_eq!(flipped, 0.25, epsilon = 0.001);
    assert!(randomized_response(&[2u8], &rr, &mut rng).is_err());
    assert!(RandomizedResponse::new(0.0f64).is_err());
    assert!(RandomizedResponse::new(1.2f64).is_err());
}

#[test]
fn randomized_response_loglik_values() {
    let rr = RandomizedResponse::<f64>::two_coin();
    let ones = vec![1.0; 800];
    let zeros = vec![0.0; 800];
    let direct_all = 800.0 * 0.75f64.ln();
    let direct_none = 800.0 * 0.25f64.ln();
    assert_abs_diff_eq!(rr_loglik(&ones, &ones, &rr).unwrap(), direct_all, epsilon = 1e-9);
    assert_abs_diff_eq!(rr_loglik(&ones, &ones, &rr).unwrap(), -230.1457, epsilon = 1e-4);
    assert_abs_diff_eq!(rr_loglik(&ones, &zeros, &rr).unwrap(), direct_none, epsilon = 1e-9);
    assert_abs_diff_eq!(rr_loglik(&ones, &zeros, &rr).unwrap(), -1109.0355, epsilon = 1e-4);
    assert_eq!(rr_loglik::<f64>(&[], &[], &rr).unwrap(), 0.0);
}

#[test]
fn budget_conversions() {
    let e = zcdp_epsilon(0.05009f64, 1e-10).unwrap();
    assert_abs_diff_eq!(e, 2.0 * 3f64.ln(), epsilon = 0.001);
    let sigma = sigma_for_approx_dp(2.0f64, 2.0 * 3f64.ln(), 1e-10).unwrap();
    assert_abs_diff_eq!(sigma, 6.32, epsilon = 0.01);
    let b = PrivacyBudget::from_zcdp(2.0 / (sigma * sigma), 1e-10).unwrap();
    assert_abs_diff_eq!(b.epsilon, 2.0 * 3f64.ln(), epsilon = 1e-9);
    assert!(zcdp_epsilon(0.0f64, 1e-10).is_err());
    assert!(zcdp_epsilon(0.1f64, 0.0).is_err());
    assert!(sigma_for_approx_dp(0.0f64, 1.0, 1e-6).is_err());
}

#[test]
fn generic_in_f32() {
    let p = DiscreteGaussian::new(0.0f32, 1.0).unwrap().pmf(0.0);
    assert!((p - 0.398_942_3).abs() < 1e-5);
    let q = DiscreteLaplace::new(1.0f32).unwrap().pmf(0.0);
    assert!((q - 0.462_117_2).abs() < 1e-5);
}

proptest! {
    #[test]
    fn dgauss_window_sums_to_one(mu in -50.0f64..50.0, sigma in 0.05f64..30.0) {
        let d = DiscreteGaussian::new(mu, sigma).unwrap();
        let half = (40.0 * sigma).ceil() as i64 + 2;
        let c = mu.round() as i64;
        let total: f64 = (c - half..=c + half).map(|x| d.pmf(x as f64)).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dgauss_shift_equivariant(mu in -20.0f64..20.0, sigma in 0.2f64..10.0, x in -30i64..30, k in -5i64..5) {
        let a = DiscreteGaussian::new(mu, sigma).unwrap().ln_pmf(x as f64);
        let b = DiscreteGaussian::new(mu + k as f64, sigma).unwrap().ln_pmf((x + k) as f64);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn dlaplace_symmetric(t in 0.05f64..20.0, x in 0i64..100) {
        let d = DiscreteLaplace::new(t).unwrap();
        prop_assert_eq!(d.ln_pmf(x as f64), d.ln_pmf(-(x as f64)));
    }

    #[test]
    fn laplace_privacy_ratio(s in -10.0f64..10.0, d in -1.0f64..1.0, u in -30.0f64..30.0, eps in 0.1f64..10.0) {
        let a = laplace_logdensity(u, s, 1.0 / eps).unwrap();
        let b = laplace_logdensity(u, s + d, 1.0 / eps).unwrap();
        prop_assert!((a - b).abs() <= eps + 1e-12);
    }

    #[test]
    fn rr_loglik_counts_matches(bits in proptest::collection::vec(0u8..2, 1..60), flips in proptest::collection::vec(any::<bool>(), 60)) {
        let rr = RandomizedResponse::<f64>::two_coin();
        let x: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
        let s: Vec<f64> = bits.iter().zip(&flips).map(|(&b, &f)| f64::from(if f { 1 - b } else { b })).collect();
        let matches = bits.iter().zip(&flips).filter(|(_, &f)| !f).count() as f64;
        let want = matches * 0.75f64.ln() + (bits.len() as f64 - matches) * 0.25f64.ln();
        prop_assert!((rr_loglik(&s, &x, &rr).unwrap() - want).abs() < 1e-9);
    }
}
