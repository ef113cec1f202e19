//! Tests for instantaneous causality between two blocks of a vector
//! autoregression whose innovations have a deterministically time-varying
//! unconditional covariance.
//!
//! The pipeline is: load or simulate a [`Dataset`], fit a VAR(p) by OLS
//! ([`fit_ols`]), then test whether the covariance block linking the first
//! `d1` series with the remaining `d2` vanishes. Three Wald statistics with a
//! chi-square reference ([`wald_test`]) assume a constant unconditional
//! variance; the sup-statistic with wild-bootstrap critical values
//! ([`wild_bootstrap_test`]) remains valid when the variance drifts over
//! rescaled time `r = t/T`.
//!
//! Data-parallel loops (bootstrap replicates, Monte Carlo replications) run
//! on rayon when the `parallel` feature is enabled. Results never depend on
//! the degree of parallelism: each replicate draws from its own
//! counter-addressed random stream, see [`rng`].

pub mod causality;
pub mod chisq;
pub mod dgp;
pub mod error;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod montecarlo;
pub mod parallel;
pub mod quadrature;
pub mod rng;
pub mod var;
pub mod weights;

pub use causality::{
    run_tests, sup_statistic, wald_test, wild_bootstrap_test, BootstrapOptions, Method, TestResult,
    WaldWeight,
};
pub use chisq::{chi_square_quantile, chi_square_survival};
pub use dgp::{cholesky_lower, simulate_var1, VarianceProfile};
pub use error::{Error, Result};
pub use io::{difference, load_csv, select_partition, CsvOptions, Dataset, Partition};
pub use kernel::{nw_covariance, Bandwidth, CovarianceCurve};
pub use montecarlo::{
    power_curve, run_experiment, wald_size_eigenvalues, ExperimentConfig, RejectionTable,
};
pub use parallel::Execution;
pub use var::{box_pierce_diagnostic, fit_ols, VarFit};
pub use weights::{cross_stat_path, omega_st, omega_varhac, omega_w, CrossStatPath, LagSelection};
