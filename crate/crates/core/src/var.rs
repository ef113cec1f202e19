//! VAR(p) estimation by ordinary least squares, without intercept.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chisq::chi_square_survival;
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::linalg::{check_symmetric_invertible, spd_solve};

/// Fitted VAR(p). The first `p` rows of the data are the presample, so
/// `residuals` has `T = n - p` rows.
#[derive(Debug, Clone)]
pub struct VarFit {
    /// `A_1, ..., A_p`, each `d x d`.
    pub coefficients: Vec<DMatrix<f64>>,
    /// `vec(A_1, ..., A_p)`, column-major, length `p d^2`.
    pub theta_hat: DVector<f64>,
    pub residuals: DMatrix<f64>,
    pub p: usize,
    pub d: usize,
    pub t_effective: usize,
    /// Heteroscedasticity-robust (sandwich) standard errors, aligned with
    /// `theta_hat`.
    pub robust_se: DVector<f64>,
}

impl VarFit {
    /// Robust standard errors laid out like the coefficient matrices.
    pub fn robust_se_matrices(&self) -> Vec<DMatrix<f64>> {
        let d = self.d;
        (0..self.p)
            .map(|i| {
                DMatrix::from_column_slice(
                    d,
                    d,
                    &self.robust_se.as_slice()[i * d * d..(i + 1) * d * d],
                )
            })
            .collect()
    }
}

/// Stacked regressors: row `t` is `(X_{t-1}', ..., X_{t-p}')` for
/// `t = p..n`.
fn lagged_regressors(values: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = values.nrows();
    let d = values.ncols();
    let t = n - p;
    let mut z = DMatrix::zeros(t, d * p);
    for lag in 1..=p {
        z.view_mut((0, (lag - 1) * d), (t, d))
            .copy_from(&values.rows(p - lag, t));
    }
    z
}

pub fn fit_ols(ds: &Dataset, p: usize) -> Result<VarFit> {
    fit_ols_values(ds.values(), p)
}

/// OLS fit on a raw `n x d` matrix of observations.
pub fn fit_ols_values(values: &DMatrix<f64>, p: usize) -> Result<VarFit> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "lag order p must be positive".into(),
        ));
    }
    let n = values.nrows();
    let d = values.ncols();
    if n <= p * d + p {
        return Err(Error::InsufficientSample(format!(
            "VAR({p}) in dimension {d} needs more than {} observations, got {n}",
            p * d + p
        )));
    }
    let t = n - p;
    let y = values.rows(p, t).into_owned();
    let z = lagged_regressors(values, p);
    let gram = z.transpose() * &z;
    let b = spd_solve(&gram, &(z.transpose() * &y), "regressor Gram matrix")?;
    let residuals = &y - &z * &b;

    let stacked = b.transpose();
    let coefficients = (0..p)
        .map(|i| stacked.columns(i * d, d).into_owned())
        .collect();
    let theta_hat = DVector::from_column_slice(stacked.as_slice());

    // (G^{-1} ⊗ I) [Σ z z' ⊗ u u'] (G^{-1} ⊗ I)
    let k = d * d * p;
    let mut meat = DMatrix::zeros(k, k);
    for row in 0..t {
        let zt = z.row(row).transpose();
        let ut = residuals.row(row).transpose();
        let score = zt.kronecker(&ut);
        meat.ger(1.0, &score, &score, 1.0);
    }
    let gram_inv = spd_solve(
        &gram,
        &DMatrix::identity(d * p, d * p),
        "regressor Gram matrix",
    )?;
    let bread = gram_inv.kronecker(&DMatrix::<f64>::identity(d, d));
    let cov = &bread * meat * &bread;
    let robust_se = cov.diagonal().map(|v| v.max(0.0).sqrt());

    Ok(VarFit {
        coefficients,
        theta_hat,
        residuals,
        p,
        d,
        t_effective: t,
        robust_se,
    })
}

/// Classical multivariate Box-Pierce portmanteau statistic. It assumes
/// homoscedastic errors, so under a drifting variance its chi-square
/// reference is only indicative.
#[derive(Debug, Clone, Serialize)]
pub struct Portmanteau {
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
    pub lags: usize,
    pub heteroscedasticity_naive: bool,
}

pub fn box_pierce_diagnostic(fit: &VarFit, h: usize) -> Result<Portmanteau> {
    if h <= fit.p {
        return Err(Error::InvalidArgument(format!(
            "portmanteau lag h = {h} must exceed the VAR order p = {}",
            fit.p
        )));
    }
    let u = &fit.residuals;
    let t = u.nrows();
    if h >= t {
        return Err(Error::InsufficientSample(format!(
            "portmanteau lag h = {h} must be below the sample size {t}"
        )));
    }
    let d = fit.d;
    let df = d * d * (h - fit.p);
    if u.iter().all(|&v| v == 0.0) {
        return Ok(Portmanteau {
            statistic: 0.0,
            p_value: 1.0,
            df,
            lags: h,
            heteroscedasticity_naive: true,
        });
    }
    let autocov = |lag: usize| -> DMatrix<f64> {
        u.rows(lag, t - lag).transpose() * u.rows(0, t - lag) / t as f64
    };
    let c0 = autocov(0);
    check_symmetric_invertible(&c0, "residual covariance")?;
    let c0_inv = c0
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("residual covariance".into()))?
        .inverse();
    let mut q = 0.0;
    for lag in 1..=h {
        let cj = autocov(lag);
        q += (cj.transpose() * &c0_inv * &cj * &c0_inv).trace();
    }
    let statistic = (t as f64 * q).max(0.0);
    Ok(Portmanteau {
        statistic,
        p_value: chi_square_survival(statistic, df)?,
        df,
        lags: h,
        heteroscedasticity_naive: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn simulate(a: &DMatrix<f64>, n: usize, seed: u64) -> DMatrix<f64> {
        let d = a.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::zeros(n, d);
        let mut prev = DVector::zeros(d);
        for t in 0..n {
            let e = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let cur = a * &prev + e;
            x.row_mut(t).copy_from(&cur.transpose());
            prev = cur;
        }
        x
    }

    #[test]
    fn noiseless_ar1_is_recovered() {
        let x: Vec<f64> = (0..20).map(|t| 0.5f64.powi(t)).collect();
        let fit = fit_ols_values(&DMatrix::from_column_slice(20, 1, &x), 1).unwrap();
        assert!((fit.coefficients[0][(0, 0)] - 0.5).abs() < 1e-12);
        assert!(fit.residuals.amax() < 1e-12);
        assert_eq!(fit.t_effective, 19);
    }

    #[test]
    fn noiseless_var2_is_recovered() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.1]);
        let n = 60;
        let mut x = DMatrix::zeros(n, 2);
        x.row_mut(0).copy_from_slice(&[1.0, -1.0]);
        x.row_mut(1).copy_from_slice(&[0.3, 2.0]);
        for t in 2..n {
            let v = &a1 * x.row(t - 1).transpose() + &a2 * x.row(t - 2).transpose();
            x.row_mut(t).copy_from(&v.transpose());
        }
        // keep only the transient so the Gram matrix stays well conditioned
        let fit = fit_ols_values(&x.rows(0, 25).into_owned(), 2).unwrap();
        assert!((&fit.coefficients[0] - &a1).amax() < 1e-10);
        assert!((&fit.coefficients[1] - &a2).amax() < 1e-10);
    }

    #[test]
    fn theta_is_column_major_vec() {
        let a = DMatrix::from_row_slice(2, 2, &[0.64, -1.0, -0.01, 0.44]);
        let fit = fit_ols_values(&simulate(&a, 300, 1), 1).unwrap();
        let c = &fit.coefficients[0];
        assert_eq!(
            fit.theta_hat.as_slice(),
            &[c[(0, 0)], c[(1, 0)], c[(0, 1)], c[(1, 1)]]
        );
        assert_eq!(fit.robust_se.len(), 4);
        assert!(fit.robust_se.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let a = DMatrix::from_row_slice(2, 2, &[0.64, -1.0, -0.01, 0.44]);
        let x = simulate(&a, 500, 3);
        let fit = fit_ols_values(&x, 2).unwrap();
        let z = lagged_regressors(&x, 2);
        let cross = z.transpose() * &fit.residuals;
        assert!(cross.amax() <= 1e-8 * x.amax().powi(2) * 500.0);
    }

    #[test]
    fn scaling_data_scales_residuals_only() {
        let a = DMatrix::from_row_slice(2, 2, &[0.64, -1.0, -0.01, 0.44]);
        let x = simulate(&a, 200, 5);
        let base = fit_ols_values(&x, 1).unwrap();
        for kappa in [-3.0, 1e-3, 1e3] {
            let scaled = fit_ols_values(&(&x * kappa), 1).unwrap();
            assert!((&scaled.coefficients[0] - &base.coefficients[0]).amax() < 1e-10);
            let diff = &scaled.residuals - &base.residuals * kappa;
            assert!(diff.amax() <= 1e-10 * kappa.abs() * base.residuals.amax());
        }
    }

    #[test]
    fn robust_se_matches_explicit_sandwich_for_ar1() {
        let a = DMatrix::from_row_slice(1, 1, &[0.4]);
        let x = simulate(&a, 400, 9);
        let fit = fit_ols_values(&x, 1).unwrap();
        let lagged: Vec<f64> = x.column(0).iter().take(399).copied().collect();
        let sxx: f64 = lagged.iter().map(|v| v * v).sum();
        let meat: f64 = lagged
            .iter()
            .zip(fit.residuals.column(0).iter())
            .map(|(z, u)| z * z * u * u)
            .sum();
        assert!((fit.robust_se[0] - meat.sqrt() / sxx).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_ols_values(&x, 2),
            Err(Error::InsufficientSample(_))
        ));
        assert!(fit_ols_values(&x, 0).is_err());
        let zeros = DMatrix::zeros(10, 2);
        assert!(matches!(
            fit_ols_values(&zeros, 1),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn box_pierce_edge_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.3]);
        let fit = fit_ols_values(&simulate(&a, 200, 11), 1).unwrap();
        assert!(box_pierce_diagnostic(&fit, 1).is_err());
        assert!(box_pierce_diagnostic(&fit, 500).is_err());
        let bp = box_pierce_diagnostic(&fit, 6).unwrap();
        assert_eq!(bp.df, 20);
        assert!((0.0..=1.0).contains(&bp.p_value));

        let mut zero = fit.clone();
        zero.residuals.fill(0.0);
        let bp = box_pierce_diagnostic(&zero, 6).unwrap();
        assert_eq!((bp.statistic, bp.p_value), (0.0, 1.0));
    }

    #[test]
    fn box_pierce_size_under_iid_errors() {
        let zero = DMatrix::zeros(2, 2);
        let rejections = (0..500u64)
            .filter(|&seed| {
                let fit = fit_ols_values(&simulate(&zero, 1001, 1000 + seed), 1).unwrap();
                box_pierce_diagnostic(&fit, 6).unwrap().p_value < 0.05
            })
            .count();
        let rate = rejections as f64 / 500.0;
        assert!((0.03..=0.08).contains(&rate), "rejection rate {rate}");
    }
}
