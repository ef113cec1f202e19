//! Nadaraya-Watson estimate of the time-varying innovation covariance
//! `Σ(r)` from residuals placed at rescaled times `t/T`.
//!
//! Gaussian kernel; near the ends of the sample the weights are simply
//! renormalized (no reflection), so the estimate is biased close to `r = 0`,
//! `r = 1` and around variance breaks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::Partition;

const MIN_KERNEL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// `T^{-1/5}`.
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(self, t_len: usize) -> f64 {
        match self {
            Bandwidth::Auto => (t_len as f64).powf(-0.2),
            Bandwidth::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CovarianceCurve {
    pub grid: Vec<f64>,
    /// Full `d x d` estimate at each grid point.
    pub estimates: Vec<DMatrix<f64>>,
    pub bandwidth: f64,
    pub d1: usize,
}

/// One `(r, i, j, value)` record of a curve, indices 1-based in the full
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub i: usize,
    pub j: usize,
    pub sigma_hat: f64,
}

impl CovarianceCurve {
    /// The `d1 x d2` upper-right block at every grid point.
    pub fn cross_block(&self) -> Vec<DMatrix<f64>> {
        let d = self.estimates[0].nrows();
        self.estimates
            .iter()
            .map(|m| m.view((0, self.d1), (self.d1, d - self.d1)).into_owned())
            .collect()
    }

    /// Flattened records; either every entry of the upper triangle or only
    /// the cross block.
    pub fn points(&self, full: bool) -> Vec<CurvePoint> {
        let d = self.estimates[0].nrows();
        let mut out = Vec::new();
        for (r, m) in self.grid.iter().zip(&self.estimates) {
            for i in 0..d {
                for j in i..d {
                    let cross = i < self.d1 && j >= self.d1;
                    if full || cross {
                        out.push(CurvePoint {
                            r: *r,
                            i: i + 1,
                            j: j + 1,
                            sigma_hat: m[(i, j)],
                        });
                    }
                }
            }
        }
        out
    }
}

/// Normalized Nadaraya-Watson weights of the `t_len` sample points at `r`.
pub fn nw_weights(r: f64, t_len: usize, bandwidth: f64) -> Result<Vec<f64>> {
    let raw: Vec<f64> = (1..=t_len)
        .map(|t| {
            let z = (t as f64 / t_len as f64 - r) / bandwidth;
            (-0.5 * z * z).exp()
        })
        .collect();
    let mass: f64 = raw.iter().sum();
    if !(mass >= MIN_KERNEL_MASS) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth {bandwidth} leaves kernel mass {mass:e} at r = {r}"
        )));
    }
    Ok(raw.into_iter().map(|w| w / mass).collect())
}

/// `Σ̂(r) = Σ_t w_t(r) u_t u_t'` on the grid `r_i = i / grid_size`.
pub fn nw_covariance(
    residuals: &DMatrix<f64>,
    d1: usize,
    bandwidth: Bandwidth,
    grid_size: usize,
) -> Result<CovarianceCurve> {
    let (t_len, d) = residuals.shape();
    Partition::new(d, d1)?;
    if t_len < 10 {
        return Err(Error::InsufficientSample(format!(
            "kernel smoothing needs at least 10 residuals, got {t_len}"
        )));
    }
    if grid_size == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    let h = bandwidth.resolve(t_len);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let grid: Vec<f64> = (1..=grid_size)
        .map(|i| i as f64 / grid_size as f64)
        .collect();
    let estimates = grid
        .iter()
        .map(|&r| {
            let w = nw_weights(r, t_len, h)?;
            let mut est = DMatrix::zeros(d, d);
            for (t, wt) in w.iter().enumerate() {
                for i in 0..d {
                    let ui = residuals[(t, i)] * wt;
                    for j in i..d {
                        est[(i, j)] += ui * residuals[(t, j)];
                    }
                }
            }
            for i in 0..d {
                for j in 0..i {
                    est[(i, j)] = est[(j, i)];
                }
            }
            Ok(est)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceCurve {
        grid,
        estimates,
        bandwidth: h,
        d1,
    })
}
