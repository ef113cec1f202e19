//! The cross-covariance score `ϑ_t = u_2t ⊗ u_1t`, its scaled partial sums,
//! and the weight matrices of the Wald statistics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Partition;
use crate::linalg::{rcond_general, spd_solve, symmetrize, RCOND_THRESHOLD};

/// Scores and their partial-sum path `δ_{t/T} = T^{-1/2} Σ_{k≤t} ϑ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossStatPath {
    /// `T x (d1 d2)`, row `t` is `vec(u_1t u_2t')`.
    pub vartheta: DMatrix<f64>,
    /// `T x (d1 d2)` cumulative sums scaled by `T^{-1/2}`.
    pub delta_path: DMatrix<f64>,
}

impl CrossStatPath {
    /// `δ_T`, the last row of the path.
    pub fn delta_t(&self) -> DVector<f64> {
        let last = self.delta_path.nrows() - 1;
        self.delta_path.row(last).transpose()
    }

    pub fn len(&self) -> usize {
        self.vartheta.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vartheta.nrows() == 0
    }
}

fn split(residuals: &DMatrix<f64>, d1: usize) -> Result<Partition> {
    if residuals.nrows() == 0 {
        return Err(Error::Empty("no residuals".into()));
    }
    Partition::new(residuals.ncols(), d1)
}

/// Rows `ϑ_t = u_2t ⊗ u_1t`.
pub fn cross_scores(residuals: &DMatrix<f64>, d1: usize) -> Result<DMatrix<f64>> {
    let part = split(residuals, d1)?;
    let t = residuals.nrows();
    let mut out = DMatrix::zeros(t, part.cross_dim());
    for row in 0..t {
        for j2 in 0..part.d2 {
            let u2 = residuals[(row, d1 + j2)];
            for j1 in 0..d1 {
                out[(row, j2 * d1 + j1)] = u2 * residuals[(row, j1)];
            }
        }
    }
    Ok(out)
}

pub fn cross_stat_path(residuals: &DMatrix<f64>, d1: usize) -> Result<CrossStatPath> {
    let vartheta = cross_scores(residuals, d1)?;
    let delta_path = partial_sum_path(&vartheta);
    Ok(CrossStatPath {
        vartheta,
        delta_path,
    })
}

pub(crate) fn partial_sum_path(vartheta: &DMatrix<f64>) -> DMatrix<f64> {
    let (t, k) = vartheta.shape();
    let scale = 1.0 / (t as f64).sqrt();
    let mut path = DMatrix::zeros(t, k);
    for j in 0..k {
        let mut acc = 0.0;
        for row in 0..t {
            acc += vartheta[(row, j)];
            path[(row, j)] = acc * scale;
        }
    }
    path
}

/// `T^{-1} Σ u_t u_t'` restricted to rows/columns `range`.
fn block_second_moment(residuals: &DMatrix<f64>, start: usize, len: usize) -> DMatrix<f64> {
    let block = residuals.columns(start, len);
    symmetrize(&(block.transpose() * block / residuals.nrows() as f64))
}

/// `(T^{-1} Σ u_2t u_2t') ⊗ (T^{-1} Σ u_1t u_1t')`.
pub fn omega_st(residuals: &DMatrix<f64>, d1: usize) -> Result<DMatrix<f64>> {
    let part = split(residuals, d1)?;
    let s11 = block_second_moment(residuals, 0, part.d1);
    let s22 = block_second_moment(residuals, part.d1, part.d2);
    Ok(s22.kronecker(&s11))
}

/// `T^{-1} Σ (u_2t u_2t') ⊗ (u_1t u_1t')`.
pub fn omega_w(residuals: &DMatrix<f64>, d1: usize) -> Result<DMatrix<f64>> {
    let part = split(residuals, d1)?;
    let t = residuals.nrows();
    let k = part.cross_dim();
    let mut acc = DMatrix::zeros(k, k);
    for row in 0..t {
        let u1 = residuals.view((row, 0), (1, part.d1)).transpose();
        let u2 = residuals.view((row, part.d1), (1, part.d2)).transpose();
        let outer1 = &u1 * u1.transpose();
        let outer2 = &u2 * u2.transpose();
        acc += outer2.kronecker(&outer1);
    }
    Ok(symmetrize(&(acc / t as f64)))
}

/// VARHAC prewhitening order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagSelection {
    Fixed(usize),
    /// Minimum AIC over `0..=max_order`; `None` means `floor(T^{1/3})`.
    Aic {
        max_order: Option<usize>,
    },
}

impl Default for LagSelection {
    fn default() -> Self {
        LagSelection::Aic { max_order: None }
    }
}

#[derive(Debug, Clone)]
pub struct VarhacEstimate {
    pub omega: DMatrix<f64>,
    pub order: usize,
    /// `A_{m,1}, ..., A_{m,m}`.
    pub coefficients: Vec<DMatrix<f64>>,
    pub sigma_z: DMatrix<f64>,
}

struct Prewhitened {
    coefficients: Vec<DMatrix<f64>>,
    sigma_z: DMatrix<f64>,
}

/// LS regression of `ϑ_t` on `ϑ_{t-1}, ..., ϑ_{t-m}` over `t = 1..T`, with
/// `ϑ_t = 0` for `t <= 0`.
fn prewhiten(vartheta: &DMatrix<f64>, m: usize) -> Result<Prewhitened> {
    let (t, k) = vartheta.shape();
    if t <= m * k {
        return Err(Error::InsufficientSample(format!(
            "VARHAC order {m} with {k} scores needs more than {} observations, got {t}",
            m * k
        )));
    }
    let mut z = DMatrix::zeros(t, m * k);
    for lag in 1..=m {
        if lag < t {
            z.view_mut((lag, (lag - 1) * k), (t - lag, k))
                .copy_from(&vartheta.rows(0, t - lag));
        }
    }
    let gram = z.transpose() * &z;
    let b = spd_solve(
        &gram,
        &(z.transpose() * vartheta),
        "VARHAC regression Gram matrix",
    )?;
    let resid = vartheta - &z * &b;
    let sigma_z = symmetrize(&(resid.transpose() * &resid / t as f64));
    let stacked = b.transpose();
    let coefficients = (0..m)
        .map(|i| stacked.columns(i * k, k).into_owned())
        .collect();
    Ok(Prewhitened {
        coefficients,
        sigma_z,
    })
}

fn aic(sigma_z: &DMatrix<f64>, m: usize, k: usize, t: usize) -> f64 {
    let det = sigma_z.determinant();
    if det <= 0.0 || !det.is_finite() {
        return f64::INFINITY;
    }
    det.ln() + 2.0 * (m * k * k) as f64 / t as f64
}

/// `Ω_h = A(1)^{-1} Σ_z A(1)^{-1}'` with `A(1) = I - Σ_k A_{m,k}`.
/// Order zero returns [`omega_w`] unchanged.
pub fn omega_varhac(
    residuals: &DMatrix<f64>,
    d1: usize,
    lags: LagSelection,
) -> Result<VarhacEstimate> {
    let vartheta = cross_scores(residuals, d1)?;
    let (t, k) = vartheta.shape();
    let order = match lags {
        LagSelection::Fixed(m) => m,
        LagSelection::Aic { max_order } => {
            let cap = max_order.unwrap_or_else(|| (t as f64).cbrt().floor() as usize);
            let mut best = (0usize, f64::INFINITY);
            for m in 0..=cap {
                if t <= m * k {
                    break;
                }
                let Ok(fit) = prewhiten(&vartheta, m) else {
                    continue;
                };
                let score = aic(&fit.sigma_z, m, k, t);
                if score < best.1 {
                    best = (m, score);
                }
            }
            best.0
        }
    };
    if order == 0 {
        let omega = omega_w(residuals, d1)?;
        return Ok(VarhacEstimate {
            sigma_z: omega.clone(),
            omega,
            order: 0,
            coefficients: Vec::new(),
        });
    }
    let fit = prewhiten(&vartheta, order)?;
    let mut a1 = DMatrix::<f64>::identity(k, k);
    for c in &fit.coefficients {
        a1 -= c;
    }
    let rcond = rcond_general(&a1);
    if !(rcond >= RCOND_THRESHOLD) {
        return Err(Error::Singular {
            what: "VARHAC A(1)".into(),
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    let a1_inv = a1
        .try_inverse()
        .ok_or_else(|| Error::Numerical("VARHAC A(1) inversion failed".into()))?;
    let omega = symmetrize(&(&a1_inv * &fit.sigma_z * a1_inv.transpose()));
    Ok(VarhacEstimate {
        omega,
        order,
        coefficients: fit.coefficients,
        sigma_z: fit.sigma_z,
    })
}
