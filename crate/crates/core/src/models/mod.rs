//! Built-in privacy models: a 2×2 contingency table released either through
//! record-level randomized response or through discrete Gaussian cell counts,
//! a clamped linear regression released through the Laplace mechanism, and a
//! one-record Gaussian toy model. Naive baselines that ignore the mechanism
//! are provided for comparison.

mod regression;
mod spd;
mod table;
mod toy;

pub use regression::{
    clamp, l1_sensitivity_regression, laplace_regression_loglik, naive_regression_posterior,
    regression_latent, regression_posterior_step, regression_record_stat, regression_stat_len,
    simulate_regression_release, NaivePosterior, NormalPosterior, RegressionModel, RegressionModelSpec,
    RegressionRelease,
};
pub use spd::nearest_spd;
pub use table::{
    cell_counts, cell_index, cell_indicator_stat, dgauss_count_loglik, dirichlet_posterior_step,
    multinomial_latent, naive_table_posterior, rr_record_stat, sample_dirichlet, NaiveTablePosterior,
    TableMechanism, TableModel, TableModelSpec, CELL_PATTERNS, TABLE_VARNAMES,
};
pub use toy::ToyGaussianModel;
