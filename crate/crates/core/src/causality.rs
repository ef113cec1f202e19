//! Instantaneous causality tests on VAR residuals.
//!
//! * `st`, `w`, `h`: Wald statistics `δ_T' Ω^{-1} δ_T` with the stationary,
//!   White-type and VARHAC weight matrices, referred to `χ²(d1 d2)`.
//! * `b`: the sup statistic `max_t ||δ_{t/T}||²` with wild-bootstrap
//!   critical values. Multipliers are scalar standard normals, one per time
//!   index, multiplying the whole score vector `ϑ_t`. The statistic is not
//!   studentized.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chisq::chi_square_survival;
use crate::error::{Error, Result};
use crate::linalg::inverse_quadratic_form;
use crate::parallel::Execution;
use crate::rng::stream_rng;
use crate::weights::{
    cross_stat_path, omega_st, omega_varhac, omega_w, CrossStatPath, LagSelection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    St,
    W,
    H,
    B,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::St, Method::W, Method::H, Method::B];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::St => "st",
            Method::W => "w",
            Method::H => "h",
            Method::B => "b",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "st" => Ok(Method::St),
            "w" => Ok(Method::W),
            "h" => Ok(Method::H),
            "b" => Ok(Method::B),
            other => Err(Error::InvalidArgument(format!(
                "unknown test method '{other}' (expected st, w, h or b)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<usize>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "m", skip_serializing_if = "Option::is_none")]
    pub varhac_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl TestResult {
    /// Rejection at level `alpha`. Chi-square tests reject when the
    /// statistic exceeds the `1 - alpha` quantile (`p < alpha`); the
    /// bootstrap test rejects when at most `alpha (B + 1) - 1` bootstrap
    /// statistics reach the observed one (`p <= alpha`).
    pub fn rejects(&self, alpha: f64) -> bool {
        match self.method {
            Method::B => self.p_value <= alpha + 1e-12,
            _ => self.p_value < alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaldWeight {
    St,
    W,
    H(LagSelection),
}

impl WaldWeight {
    pub fn method(&self) -> Method {
        match self {
            WaldWeight::St => Method::St,
            WaldWeight::W => Method::W,
            WaldWeight::H(_) => Method::H,
        }
    }
}

pub fn wald_test(residuals: &DMatrix<f64>, d1: usize, weight: WaldWeight) -> Result<TestResult> {
    let path = cross_stat_path(residuals, d1)?;
    let delta = path.delta_t();
    let (omega, name, order) = match weight {
        WaldWeight::St => (omega_st(residuals, d1)?, "Ω_st (stationary weight)", None),
        WaldWeight::W => (omega_w(residuals, d1)?, "Ω_w (White weight)", None),
        WaldWeight::H(lags) => {
            let est = omega_varhac(residuals, d1, lags)?;
            (est.omega, "Ω_h (VARHAC weight)", Some(est.order))
        }
    };
    let statistic = inverse_quadratic_form(&omega, &delta, name)?;
    let df = delta.len();
    Ok(TestResult {
        method: weight.method(),
        statistic,
        p_value: chi_square_survival(statistic, df)?,
        df: Some(df),
        replications: None,
        seed: None,
        varhac_order: order,
        warning: None,
    })
}

/// `sup_s ||δ_s||²`, attained on the grid `s = t/T`.
pub fn sup_statistic(path: &CrossStatPath) -> f64 {
    path.delta_path
        .row_iter()
        .map(|r| r.norm_squared())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapOptions {
    pub replications: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl BootstrapOptions {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// One bootstrap path summarized by its sup and its endpoint `δ_1^{(i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraw {
    pub sup: f64,
    pub endpoint: DVector<f64>,
}

/// Replicate `index` of the wild bootstrap, drawn from stream `index` of
/// `seed`.
pub fn bootstrap_replicate(vartheta: &DMatrix<f64>, seed: u64, index: u64) -> BootstrapDraw {
    let (t, k) = vartheta.shape();
    let scale = 1.0 / (t as f64).sqrt();
    let mut rng = stream_rng(seed, index);
    let mut acc = DVector::zeros(k);
    let mut sup = 0.0f64;
    for row in 0..t {
        let xi: f64 = StandardNormal.sample(&mut rng);
        for j in 0..k {
            acc[j] += xi * vartheta[(row, j)];
        }
        sup = sup.max(acc.norm_squared() * scale * scale);
    }
    BootstrapDraw {
        sup,
        endpoint: acc * scale,
    }
}

/// Bootstrap sup statistics `S_b^{(1)}, ..., S_b^{(B)}`, in replicate order.
pub fn bootstrap_statistics(vartheta: &DMatrix<f64>, options: &BootstrapOptions) -> Vec<f64> {
    options.execution.map_indexed(options.replications, |i| {
        bootstrap_replicate(vartheta, options.seed, i as u64).sup
    })
}

/// `(1 + #{S_b^{(i)} >= S_b}) / (B + 1)`.
pub fn bootstrap_p_value(observed: f64, draws: &[f64]) -> f64 {
    let exceed = draws.iter().filter(|&&s| s >= observed).count();
    (1 + exceed) as f64 / (draws.len() + 1) as f64
}

pub fn wild_bootstrap_test(
    residuals: &DMatrix<f64>,
    d1: usize,
    options: &BootstrapOptions,
) -> Result<TestResult> {
    if options.replications == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap replications B must be at least 1".into(),
        ));
    }
    let path = cross_stat_path(residuals, d1)?;
    let statistic = sup_statistic(&path);
    let degenerate = path.vartheta.iter().all(|&v| v == 0.0);
    let (p_value, warning) = if degenerate {
        (
            1.0,
            Some("all cross products are zero; bootstrap distribution is degenerate".to_string()),
        )
    } else {
        let draws = bootstrap_statistics(&path.vartheta, options);
        (bootstrap_p_value(statistic, &draws), None)
    };
    Ok(TestResult {
        method: Method::B,
        statistic,
        p_value,
        df: None,
        replications: Some(options.replications),
        seed: Some(options.seed),
        varhac_order: None,
        warning,
    })
}

/// Runs each requested test. `h` uses `lags`; `b` uses `bootstrap`.
pub fn run_tests(
    residuals: &DMatrix<f64>,
    d1: usize,
    methods: &[Method],
    lags: LagSelection,
    bootstrap: &BootstrapOptions,
) -> Result<Vec<TestResult>> {
    methods
        .iter()
        .map(|m| match m {
            Method::St => wald_test(residuals, d1, WaldWeight::St),
            Method::W => wald_test(residuals, d1, WaldWeight::W),
            Method::H => wald_test(residuals, d1, WaldWeight::H(lags)),
            Method::B => wild_bootstrap_test(residuals, d1, bootstrap),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hand_residuals() -> DMatrix<f64> {
        DMatrix::from_column_slice(4, 2, &[1.0, -1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0])
    }

    fn gaussian(t: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(t, d, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn hand_wald_statistics() {
        let r = hand_residuals();
        for w in [WaldWeight::St, WaldWeight::W] {
            let res = wald_test(&r, 1, w).unwrap();
            assert!((res.statistic - 2.0 / 3.0).abs() < 1e-12);
            assert_eq!(res.df, Some(1));
            assert!((res.p_value - 0.414_216_178_242_525_1).abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_blocks_give_zero_statistic() {
        let r = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 2.0, 0.0, 0.0, 3.0, 0.0, 1.0]);
        let res = wald_test(&r, 1, WaldWeight::St).unwrap();
        assert_eq!((res.statistic, res.p_value), (0.0, 1.0));
        // every product vanishes, so the White weight is zero and cannot be inverted
        match wald_test(&r, 1, WaldWeight::W) {
            Err(Error::Singular { what, .. }) => assert!(what.contains("Ω_w")),
            other => panic!("expected singular weight, got {other:?}"),
        }
    }

    #[test]
    fn sup_statistic_on_hand_path() {
        let path = cross_stat_path(&hand_residuals(), 1).unwrap();
        assert_eq!(sup_statistic(&path), 1.0);
        let zero = cross_stat_path(&DMatrix::zeros(5, 2), 1).unwrap();
        assert_eq!(sup_statistic(&zero), 0.0);
    }

    #[test]
    fn sup_dominates_endpoint() {
        for seed in 0..20 {
            let path = cross_stat_path(&gaussian(50, 3, seed), 2).unwrap();
            assert!(sup_statistic(&path) >= path.delta_t().norm_squared());
        }
    }

    #[test]
    fn bootstrap_p_value_by_enumeration() {
        let r = hand_residuals();
        let opts = BootstrapOptions::new(3, 42);
        let res = wild_bootstrap_test(&r, 1, &opts).unwrap();
        assert_eq!(res.statistic, 1.0);
        let path = cross_stat_path(&r, 1).unwrap();
        let manual: Vec<f64> = (0..3)
            .map(|i| {
                // replay each replicate's multipliers by hand
                let mut rng = stream_rng(42, i);
                let mut acc = 0.0f64;
                let mut sup = 0.0f64;
                for t in 0..4 {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    acc += xi * path.vartheta[(t, 0)];
                    sup = sup.max(acc * acc / 4.0);
                }
                sup
            })
            .collect();
        let count = manual.iter().filter(|&&s| s >= 1.0).count();
        assert_eq!(res.p_value, (1 + count) as f64 / 4.0);
        assert!([0.25, 0.5, 0.75, 1.0].contains(&res.p_value));
        assert_eq!(res.replications, Some(3));
        assert_eq!(res.seed, Some(42));
        assert_eq!(wild_bootstrap_test(&r, 1, &opts).unwrap(), res);
    }

    #[test]
    fn bootstrap_errors_and_degenerate_input() {
        let r = hand_residuals();
        assert!(wild_bootstrap_test(&r, 1, &BootstrapOptions::new(0, 1)).is_err());
        let zero = DMatrix::zeros(10, 2);
        let res = wild_bootstrap_test(&zero, 1, &BootstrapOptions::new(9, 1)).unwrap();
        assert_eq!(res.p_value, 1.0);
        assert!(res.warning.is_some());
    }

    #[test]
    fn bootstrap_independent_of_execution() {
        let r = gaussian(80, 3, 5);
        let seq = BootstrapOptions::new(50, 9).with_execution(Execution::Sequential);
        let par = seq.with_execution(Execution::Parallel { threads: Some(4) });
        let path = cross_stat_path(&r, 1).unwrap();
        assert_eq!(
            bootstrap_statistics(&path.vartheta, &seq),
            bootstrap_statistics(&path.vartheta, &par)
        );
    }

    #[test]
    fn p_values_are_on_the_rank_grid() {
        let r = gaussian(60, 2, 3);
        let b = 19;
        let res = wild_bootstrap_test(&r, 1, &BootstrapOptions::new(b, 2)).unwrap();
        let scaled = res.p_value * (b + 1) as f64;
        assert!((scaled - scaled.round()).abs() < 1e-12);
        assert!(res.p_value >= 1.0 / 20.0 && res.p_value <= 1.0);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("st".parse::<Method>().unwrap(), Method::St);
        assert_eq!(" B ".parse::<Method>().unwrap(), Method::B);
        assert!("q".parse::<Method>().is_err());
    }
}
