use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use privpost::mechanisms::DiscreteGaussian;
use privpost::oracle::{
    dirichlet_log_prior, exact_count_posterior, exact_rr_posterior, max_marginal_tv, tv_distance, Binning,
    GridPosterior, ThetaGrid, COUNT_ENUMERATION_CAP,
};
use privpost::Error;

fn normalized(log_masses: Vec<f64>) -> Vec<f64> {
    let m = log_masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_masses.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn dirichlet_weights(grid: &ThetaGrid, alpha: &[f64]) -> Vec<f64> {
    normalized(
        grid.iter()
            .map(|p| p.iter().zip(alpha).map(|(t, a)| (a - 1.0) * t.ln()).sum())
            .collect(),
    )
}

fn assert_weights_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn noiseless_rr_reduces_to_dirichlet() {
    let grid = ThetaGrid::simplex(4, 30).unwrap();
    let patterns = vec![vec![1, 1], vec![1, 1], vec![1, 0], vec![0, 0], vec![0, 1], vec![0, 0], vec![0, 0]];
    let post = exact_rr_posterior(&patterns, 1.0, &grid, dirichlet_log_prior(&[1.0; 4])).unwrap();
    let want = dirichlet_weights(&grid, &[3.0, 2.0, 2.0, 4.0]);
    assert_weights_close(&post.weights(), &want, 1e-9);
}

#[test]
fn noiseless_counts_reduce_to_dirichlet() {
    let grid = ThetaGrid::simplex(4, 30).unwrap();
    let post = exact_count_posterior(&[3.0, 1.0, 0.0, 2.0], 1e-3, 6, &grid, dirichlet_log_prior(&[1.0; 4])).unwrap();
    let want = dirichlet_weights(&grid, &[4.0, 2.0, 1.0, 3.0]);
    assert_weights_close(&post.weights(), &want, 1e-9);
}

#[test]
fn two_record_rr_hand_enumeration() {
    let grid = ThetaGrid::simplex(2, 50).unwrap();
    let q = 0.75;
    let post = exact_rr_posterior(&[vec![1], vec![0]], q, &grid, dirichlet_log_prior(&[1.0, 1.0])).unwrap();
    let want = normalized(
        grid.iter()
            .map(|t| ((t[0] * q + t[1] * (1.0 - q)) * (t[0] * (1.0 - q) + t[1] * q)).ln())
            .collect(),
    );
    assert_weights_close(&post.weights(), &want, 1e-12);
}

#[test]
fn two_record_count_hand_enumeration() {
    let grid = ThetaGrid::simplex(2, 50).unwrap();
    let sigma = 0.8;
    let sdp = [2.0, -1.0];
    let post = exact_count_posterior(&sdp, sigma, 2, &grid, dirichlet_log_prior(&[1.0, 1.0])).unwrap();
    let dg = DiscreteGaussian::new(0.0, sigma).unwrap();
    let eta = |c: [f64; 2]| (dg.ln_pmf(sdp[0] - c[0]) + dg.ln_pmf(sdp[1] - c[1])).exp();
    let want = normalized(
        grid.iter()
            .map(|t| {
                let (a, b) = (t[0], t[1]);
                (b * b * eta([0.0, 2.0]) + 2.0 * a * b * eta([1.0, 1.0]) + a * a * eta([2.0, 0.0])).ln()
            })
            .collect(),
    );
    assert_weights_close(&post.weights(), &want, 1e-12);
}

#[test]
fn permuting_cells_permutes_the_posterior() {
    let grid = ThetaGrid::simplex(4, 24).unwrap();
    let prior = dirichlet_log_prior(&[1.0; 4]);
    let a = exact_count_posterior(&[4.0, 1.0, 2.0, 3.0], 1.5, 8, &grid, &prior).unwrap().mean();
    let b = exact_count_posterior(&[3.0, 2.0, 1.0, 4.0], 1.5, 8, &grid, &prior).unwrap().mean();
    for k in 0..4 {
        assert_relative_eq!(a[k], b[3 - k], epsilon = 1e-9);
    }
}

#[test]
fn exact_samples_have_small_tv() {
    let grid = ThetaGrid::simplex(4, 60).unwrap();
    let post = exact_count_posterior(&[3.0, 2.0, 1.0, 2.0], 1.0, 8, &grid, dirichlet_log_prior(&[1.0; 4])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = post.sample(100_000, &mut rng).unwrap();
    assert!(max_marginal_tv(&draws, &post, 0.02).unwrap() < 0.02);
    let joint = tv_distance(&draws, &post, Binning::Joint2 { coords: [0, 1], width: 0.05 }).unwrap();
    assert!(joint < 0.02, "{joint}");
}

#[test]
fn disjoint_supports_have_unit_tv() {
    let grid = ThetaGrid::new(&[vec![0.1, 0.9]]).unwrap();
    let post = GridPosterior::from_log_masses(grid, vec![0.0]).unwrap();
    let draws = vec![vec![0.9, 0.1]; 10];
    assert_relative_eq!(tv_distance(&draws, &post, Binning::Marginal { coord: 0, width: 0.02 }).unwrap(), 1.0, epsilon = 1e-12);
    assert!(tv_distance(&draws, &post, Binning::Marginal { coord: 0, width: 0.0 }).is_err());
    assert!(tv_distance(&[], &post, Binning::Marginal { coord: 0, width: 0.02 }).is_err());
}

#[test]
fn enumeration_cap_enforced() {
    let grid = ThetaGrid::simplex(2, 10).unwrap();
    let err = exact_count_posterior(&[1.0, 1.0], 1.0, COUNT_ENUMERATION_CAP + 1, &grid, dirichlet_log_prior(&[1.0, 1.0])).unwrap_err();
    assert!(matches!(err, Error::Capacity(_)));
    assert!(exact_rr_posterior(&[vec![1, 0]], 0.75, &grid, dirichlet_log_prior(&[1.0, 1.0])).is_err());
    assert!(exact_rr_posterior(&[vec![1]], 0.0, &grid, dirichlet_log_prior(&[1.0, 1.0])).is_err());
}
