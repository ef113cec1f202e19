//! Simulation of VAR(1) processes whose Gaussian innovations have a
//! deterministic covariance `Σ(t/T)` in rescaled time.
//!
//! `u_t = G(t/T) ε_t` with `G` the lower Cholesky factor of `Σ`, so the
//! process is a triangular array: changing `T` moves every `u_t` to a new
//! point of the profile. The recursion starts from `X_0 = 0` with no burn-in,
//! since a burn-in would shift the variance profile.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::linalg::spectral_radius;
use crate::rng::stream_rng;

/// Linear interpolation from `start` to `end` over `(previous end, until]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub until: f64,
    pub start: DMatrix<f64>,
    pub end: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarianceProfile {
    /// `diag(a - cos(b r), a + sin(b r))`: no instantaneous causality.
    Case1 { a: f64, b: f64 },
    /// Case 1 plus off-diagonal `c sin(2π r)`, which integrates to zero.
    Case2 { a: f64, b: f64, c: f64 },
    /// Piecewise-linear segments covering `(0, 1]`.
    Piecewise(Vec<Segment>),
}

impl VarianceProfile {
    pub fn case1(a: f64, b: f64) -> Self {
        VarianceProfile::Case1 { a, b }
    }

    pub fn case2(a: f64, b: f64, c: f64) -> Self {
        VarianceProfile::Case2 { a, b, c }
    }

    pub fn constant(sigma: DMatrix<f64>) -> Result<Self> {
        Self::piecewise(vec![Segment {
            until: 1.0,
            start: sigma.clone(),
            end: sigma,
        }])
    }

    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::InvalidArgument(
                "piecewise profile needs a segment".into(),
            ));
        };
        let d = first.start.nrows();
        let mut prev = 0.0;
        for seg in &segments {
            if !(seg.until > prev && seg.until <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "segment breakpoints must increase within (0, 1], got {}",
                    seg.until
                )));
            }
            for m in [&seg.start, &seg.end] {
                if m.shape() != (d, d) {
                    return Err(Error::Dimension(
                        "profile matrices must all be d x d".into(),
                    ));
                }
                if m != &m.transpose() {
                    return Err(Error::InvalidArgument(
                        "profile matrices must be symmetric".into(),
                    ));
                }
            }
            prev = seg.until;
        }
        if prev != 1.0 {
            return Err(Error::InvalidArgument("segments must cover (0, 1]".into()));
        }
        Ok(VarianceProfile::Piecewise(segments))
    }

    pub fn dim(&self) -> usize {
        match self {
            VarianceProfile::Case1 { .. } | VarianceProfile::Case2 { .. } => 2,
            VarianceProfile::Piecewise(s) => s[0].start.nrows(),
        }
    }

    /// `Σ(r)` for `r` in `(0, 1]`.
    pub fn sigma_at(&self, r: f64) -> Result<DMatrix<f64>> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rescaled time must lie in (0, 1], got {r}"
            )));
        }
        Ok(self.sigma_unchecked(r))
    }

    /// Closed form without the domain check; also used by quadrature at the
    /// left endpoint.
    pub(crate) fn sigma_unchecked(&self, r: f64) -> DMatrix<f64> {
        match *self {
            VarianceProfile::Case1 { a, b } => {
                DMatrix::from_row_slice(2, 2, &[a - (b * r).cos(), 0.0, 0.0, a + (b * r).sin()])
            }
            VarianceProfile::Case2 { a, b, c } => {
                let off = c * (2.0 * PI * r).sin();
                DMatrix::from_row_slice(2, 2, &[a - (b * r).cos(), off, off, a + (b * r).sin()])
            }
            VarianceProfile::Piecewise(ref segments) => {
                let mut lo = 0.0;
                for seg in segments {
                    if r <= seg.until {
                        let w = (r - lo) / (seg.until - lo);
                        return &seg.start * (1.0 - w) + &seg.end * w;
                    }
                    lo = seg.until;
                }
                segments[segments.len() - 1].end.clone()
            }
        }
    }

    /// Breakpoints in `(0, 1)` where the profile may be non-smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            VarianceProfile::Piecewise(s) => {
                s.iter().map(|seg| seg.until).filter(|&u| u < 1.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Lower Cholesky factors `G(t/T)` for `t = 1..T`; fails on the first
    /// grid point where `Σ` is not positive definite.
    pub fn factors_on_grid(&self, t_len: usize) -> Result<Vec<DMatrix<f64>>> {
        (1..=t_len)
            .map(|t| {
                let r = t as f64 / t_len as f64;
                cholesky_lower(&self.sigma_unchecked(r)).map_err(|e| match e {
                    Error::NotPositiveDefinite(msg) => {
                        Error::NotPositiveDefinite(format!("Σ(r) at r = {r}: {msg}"))
                    }
                    other => other,
                })
            })
            .collect()
    }

    pub fn check_positive_definite(&self, t_len: usize) -> Result<()> {
        self.factors_on_grid(t_len).map(|_| ())
    }
}

/// Lower-triangular `G` with positive diagonal and `G G' = Σ`.
pub fn cholesky_lower(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::Dimension(format!(
            "Cholesky needs a square matrix, got {}x{}",
            n,
            sigma.ncols()
        )));
    }
    let scale = sigma.amax();
    for i in 0..n {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(
                    "Cholesky input is not symmetric".into(),
                ));
            }
        }
    }
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = sigma[(j, j)];
        for k in 0..j {
            diag -= g[(j, k)] * g[(j, k)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "leading minor {} is not positive",
                j + 1
            )));
        }
        let pivot = diag.sqrt();
        g[(j, j)] = pivot;
        for i in (j + 1)..n {
            let mut v = sigma[(i, j)];
            for k in 0..j {
                v -= g[(i, k)] * g[(j, k)];
            }
            g[(i, j)] = v / pivot;
        }
    }
    Ok(g)
}

/// The autoregressive matrix of the simulation design.
pub fn default_coefficients() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.64, -1.0, -0.01, 0.44])
}

/// Simulates `X_t = A X_{t-1} + G(t/T) ε_t`, `t = 1..T`, from `X_0 = 0`.
/// The `ε_t` are standard normal draws from stream 0 of `seed`, taken in
/// time order, component by component.
pub fn simulate_var1(
    a: &DMatrix<f64>,
    profile: &VarianceProfile,
    t_len: usize,
    seed: u64,
) -> Result<Dataset> {
    let d = profile.dim();
    if a.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "coefficient matrix is {}x{}, profile dimension is {d}",
            a.nrows(),
            a.ncols()
        )));
    }
    if t_len == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let rho = spectral_radius(a);
    if !(rho < 1.0) {
        return Err(Error::Unstable(rho));
    }
    let factors = profile.factors_on_grid(t_len)?;
    let mut rng = stream_rng(seed, 0);
    let mut x = DMatrix::zeros(t_len, d);
    let mut prev = DVector::zeros(d);
    let mut eps = DVector::zeros(d);
    for (t, g) in factors.iter().enumerate() {
        for e in eps.iter_mut() {
            *e = StandardNormal.sample(&mut rng);
        }
        let cur = a * &prev + g * &eps;
        x.row_mut(t).copy_from(&cur.transpose());
        prev = cur;
    }
    Dataset::from_matrix(x)
}
