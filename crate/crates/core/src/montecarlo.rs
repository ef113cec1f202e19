//! Monte Carlo size and power experiments on the simulated bivariate
//! VAR(1), and the limiting weighted chi-square law of the stationary Wald
//! statistic under a drifting variance.
//!
//! Replication `i` at sample size `T` simulates from seed
//! `derive_seed(derive_seed(master, T), i)`, so any single cell can be rerun
//! in isolation and results do not depend on how replications are scheduled.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::causality::{run_tests, BootstrapOptions, Method, TestResult};
use crate::chisq::{chi_square_quantile, chi_square_survival};
use crate::dgp::{simulate_var1, VarianceProfile};
use crate::error::{Error, Result};
use crate::io::Partition;
use crate::linalg::inverse_sqrt_spd;
use crate::parallel::Execution;
use crate::quadrature::integrate_unit;
use crate::rng::{derive_seed, stream_rng};
use crate::var::fit_ols_values;
use crate::weights::LagSelection;

const BOOTSTRAP_SEED_LABEL: u64 = 0xb007;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    /// 1: size design (`c` forced to 0); 2: power design.
    pub case: u8,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub coefficients: [[f64; 2]; 2],
    pub sample_sizes: Vec<usize>,
    pub levels: Vec<f64>,
    pub replications: usize,
    pub bootstrap_b: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub varhac: LagSelection,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: 1,
            a: 1.1,
            b: 11.0,
            c: 0.5,
            coefficients: [[0.64, -1.0], [-0.01, 0.44]],
            sample_sizes: vec![50, 100, 200, 500, 1000],
            levels: vec![0.01, 0.05, 0.10],
            replications: 1000,
            bootstrap_b: 299,
            seed: 1,
            methods: vec![Method::St, Method::W, Method::B],
            varhac: LagSelection::default(),
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    /// Quick settings for continuous integration: `N = 300`, `B = 199`.
    pub fn fast(mut self) -> Self {
        self.replications = 300;
        self.bootstrap_b = 199;
        self
    }

    pub fn profile(&self) -> VarianceProfile {
        match self.case {
            1 => VarianceProfile::case1(self.a, self.b),
            _ => VarianceProfile::case2(self.a, self.b, self.c),
        }
    }

    fn coefficient_matrix(&self) -> DMatrix<f64> {
        let [[a, b], [c, d]] = self.coefficients;
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    pub fn validate(&self) -> Result<()> {
        if self.case != 1 && self.case != 2 {
            return Err(Error::InvalidArgument(format!(
                "case must be 1 or 2, got {}",
                self.case
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument(
                "replications N must be at least 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no test methods requested".into()));
        }
        if self.methods.contains(&Method::B) && self.bootstrap_b == 0 {
            return Err(Error::InvalidArgument(
                "bootstrap B must be at least 1".into(),
            ));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "nominal level {l} is outside (0, 1)"
            )));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidArgument("no sample sizes requested".into()));
        }
        Ok(())
    }

    /// Simulation seed of replication `index` at sample size `t_len`.
    pub fn replication_seed(&self, t_len: usize, index: usize) -> u64 {
        derive_seed(derive_seed(self.seed, t_len as u64), index as u64)
    }
}

/// Simulate, fit VAR(1) by OLS and run every requested test once.
pub fn run_replication(
    cfg: &ExperimentConfig,
    t_len: usize,
    index: usize,
) -> Result<Vec<TestResult>> {
    let seed = cfg.replication_seed(t_len, index);
    let data = simulate_var1(&cfg.coefficient_matrix(), &cfg.profile(), t_len, seed)?;
    let fit = fit_ols_values(data.values(), 1)?;
    let bootstrap = BootstrapOptions::new(cfg.bootstrap_b, derive_seed(seed, BOOTSTRAP_SEED_LABEL))
        .with_execution(Execution::Sequential);
    run_tests(&fit.residuals, 1, &cfg.methods, cfg.varhac, &bootstrap)
}

/// All replications at one sample size, in replication order. The first
/// failing replication aborts the cell.
pub fn simulate_cell(cfg: &ExperimentConfig, t_len: usize) -> Result<Vec<Vec<TestResult>>> {
    cfg.validate()?;
    cfg.profile().check_positive_definite(t_len)?;
    cfg.execution
        .map_indexed(cfg.replications, |i| {
            run_replication(cfg, t_len, i).map_err(|e| {
                Error::Numerical(format!("replication {i} at T = {t_len} failed: {e}"))
            })
        })
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionCell {
    #[serde(rename = "T")]
    pub t_len: usize,
    pub alpha: f64,
    pub method: Method,
    pub reject_freq: f64,
    #[serde(rename = "N")]
    pub replications: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectionTable {
    pub cells: Vec<RejectionCell>,
    pub config: ExperimentConfig,
}

impl RejectionTable {
    pub fn get(&self, t_len: usize, alpha: f64, method: Method) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.t_len == t_len && c.alpha == alpha && c.method == method)
            .map(|c| c.reject_freq)
    }

    /// CSV with header `T,alpha,method,reject_freq,N`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,alpha,method,reject_freq,N\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{:?},{},{:?},{}\n",
                c.t_len, c.alpha, c.method, c.reject_freq, c.replications
            ));
        }
        out
    }
}

fn frequencies(
    outcomes: &[Vec<TestResult>],
    t_len: usize,
    levels: &[f64],
    methods: &[Method],
) -> Vec<RejectionCell> {
    let n = outcomes.len();
    let mut cells = Vec::new();
    for &alpha in levels {
        for (k, &method) in methods.iter().enumerate() {
            let rejected = outcomes.iter().filter(|r| r[k].rejects(alpha)).count();
            cells.push(RejectionCell {
                t_len,
                alpha,
                method,
                reject_freq: rejected as f64 / n as f64,
                replications: n,
            });
        }
    }
    cells
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RejectionTable> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &t_len in &cfg.sample_sizes {
        let outcomes = simulate_cell(cfg, t_len)?;
        cells.extend(frequencies(&outcomes, t_len, &cfg.levels, &cfg.methods));
    }
    Ok(RejectionTable {
        cells,
        config: cfg.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub c: f64,
    #[serde(rename = "T")]
    pub t_len: usize,
    pub alpha: f64,
    pub method: Method,
    pub reject_freq: f64,
    #[serde(rename = "N")]
    pub replications: usize,
}

/// Rejection frequencies of the power design as `c` varies. Every `c` reuses
/// the same replication seeds, so the curve is traced with common random
/// numbers.
pub fn power_curve(cfg: &ExperimentConfig, c_values: &[f64]) -> Result<Vec<PowerPoint>> {
    if cfg.sample_sizes.len() != 1 {
        return Err(Error::InvalidArgument(
            "a power curve needs exactly one sample size".into(),
        ));
    }
    let mut out = Vec::new();
    for &c in c_values {
        let cell_cfg = ExperimentConfig {
            case: 2,
            c,
            ..cfg.clone()
        };
        let table = run_experiment(&cell_cfg)?;
        out.extend(table.cells.iter().map(|cell| PowerPoint {
            c,
            t_len: cell.t_len,
            alpha: cell.alpha,
            method: cell.method,
            reject_freq: cell.reject_freq,
            replications: cell.replications,
        }));
    }
    Ok(out)
}

/// Limiting law `Σ_j λ_j Z_j²` of the stationary Wald statistic.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedChiSquare {
    /// Eigenvalues of `Ω_st^{-1/2} Ω Ω_st^{-1/2}`, descending.
    pub lambdas: Vec<f64>,
    /// `(alpha, P(Σ λ_j Z_j² > χ²_{d1 d2, 1-alpha}))`.
    pub implied_size: Vec<(f64, f64)>,
    #[serde(skip)]
    pub omega: DMatrix<f64>,
    #[serde(skip)]
    pub omega_st: DMatrix<f64>,
}

pub const IMPLIED_SIZE_DRAWS: usize = 1_000_000;

/// Integrated `Ω = ∫ Σ22 ⊗ Σ11` and `Ω_st = ∫ Σ22 ⊗ ∫ Σ11` for Gaussian
/// innovations.
pub fn integrated_weights(
    profile: &VarianceProfile,
    d1: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = profile.dim();
    let part = Partition::new(d, d1)?;
    let k = part.cross_dim();
    let integrand = |r: f64| {
        let s = profile.sigma_unchecked(r);
        let s11 = s.view((0, 0), (d1, d1)).into_owned();
        let s22 = s.view((d1, d1), (part.d2, part.d2)).into_owned();
        let kron = s22.kronecker(&s11);
        let mut v = DVector::zeros(d1 * d1 + part.d2 * part.d2 + k * k);
        v.rows_mut(0, d1 * d1).copy_from_slice(s11.as_slice());
        v.rows_mut(d1 * d1, part.d2 * part.d2)
            .copy_from_slice(s22.as_slice());
        v.rows_mut(d1 * d1 + part.d2 * part.d2, k * k)
            .copy_from_slice(kron.as_slice());
        v
    };
    let total = integrate_unit(integrand, &profile.breakpoints(), 1e-12)?;
    let i11 = DMatrix::from_column_slice(d1, d1, &total.as_slice()[..d1 * d1]);
    let i22 = DMatrix::from_column_slice(
        part.d2,
        part.d2,
        &total.as_slice()[d1 * d1..d1 * d1 + part.d2 * part.d2],
    );
    let omega = DMatrix::from_column_slice(k, k, &total.as_slice()[d1 * d1 + part.d2 * part.d2..]);
    Ok((omega, i22.kronecker(&i11)))
}

/// `n` draws of `Σ_j λ_j Z_j²` from stream 0 of `seed`.
pub fn weighted_chi_square_sample(lambdas: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    (0..n)
        .map(|_| {
            lambdas
                .iter()
                .map(|l| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    l * z * z
                })
                .sum()
        })
        .collect()
}

pub fn wald_size_eigenvalues(
    profile: &VarianceProfile,
    d1: usize,
    levels: &[f64],
    seed: u64,
) -> Result<WeightedChiSquare> {
    let (omega, omega_st) = integrated_weights(profile, d1)?;
    let root = inverse_sqrt_spd(&omega_st, "integrated stationary weight Ω_st")?;
    let transformed = &root * &omega * &root;
    let transformed = (&transformed + transformed.transpose()) * 0.5;
    let mut lambdas: Vec<f64> = transformed
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let k = lambdas.len();

    // a common λ makes the law a scaled χ²(k), available in closed form
    let common = lambdas[0];
    let scaled_chi_square = lambdas.iter().all(|l| (l - common).abs() <= 1e-12 * common);
    let sample = if scaled_chi_square {
        Vec::new()
    } else {
        weighted_chi_square_sample(&lambdas, IMPLIED_SIZE_DRAWS, seed)
    };
    let implied_size = levels
        .iter()
        .map(|&alpha| {
            let q = chi_square_quantile(alpha, k)?;
            let size = if scaled_chi_square {
                chi_square_survival(q / common, k)?
            } else {
                sample.iter().filter(|&&s| s > q).count() as f64 / sample.len() as f64
            };
            Ok((alpha, size))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedChiSquare {
        lambdas,
        implied_size,
        omega,
        omega_st,
    })
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Half-width of the normal-approximation binomial band for a rejection
/// frequency at level `alpha` over `n` replications.
pub fn binomial_half_width(alpha: f64, n: usize, z: f64) -> f64 {
    z * (alpha * (1.0 - alpha) / n as f64).sqrt()
}
