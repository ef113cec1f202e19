//! Adaptive Simpson quadrature for vector-valued integrands.

use nalgebra::DVector;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 50;

struct Panel {
    a: f64,
    b: f64,
    fa: DVector<f64>,
    fm: DVector<f64>,
    fb: DVector<f64>,
    whole: DVector<f64>,
}

fn simpson(
    a: f64,
    b: f64,
    fa: &DVector<f64>,
    fm: &DVector<f64>,
    fb: &DVector<f64>,
) -> DVector<f64> {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

fn recurse<F: Fn(f64) -> DVector<f64>>(
    f: &F,
    p: Panel,
    tol: f64,
    depth: usize,
) -> Result<DVector<f64>> {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, &p.fa, &flm, &p.fm);
    let right = simpson(m, p.b, &p.fm, &frm, &p.fb);
    let delta = &left + &right - &p.whole;
    let err = delta.amax();
    if err <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH || !err.is_finite() {
        return Err(Error::Numerical(format!(
            "quadrature did not converge on [{}, {}] (error estimate {err:e})",
            p.a, p.b
        )));
    }
    let l = recurse(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm.clone(),
            whole: left,
        },
        tol / 2.0,
        depth + 1,
    )?;
    let r = recurse(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        tol / 2.0,
        depth + 1,
    )?;
    Ok(l + r)
}

/// `∫_a^b f`, entrywise absolute error about `tol`.
pub fn integrate<F: Fn(f64) -> DVector<f64>>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<DVector<f64>> {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, &fa, &fm, &fb);
    // start from a few panels so oscillating integrands are not missed
    let pieces = 16;
    let width = (b - a) / pieces as f64;
    let mut total = DVector::zeros(whole.len());
    for i in 0..pieces {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let flo = f(lo);
        let fhi = f(hi);
        let fmid = f(0.5 * (lo + hi));
        let s = simpson(lo, hi, &flo, &fmid, &fhi);
        total += recurse(
            &f,
            Panel {
                a: lo,
                b: hi,
                fa: flo,
                fm: fmid,
                fb: fhi,
                whole: s,
            },
            tol / pieces as f64,
            0,
        )?;
    }
    Ok(total)
}

/// Integral over `(0, 1]` split at the given interior breakpoints.
pub fn integrate_unit<F: Fn(f64) -> DVector<f64>>(
    f: F,
    breakpoints: &[f64],
    tol: f64,
) -> Result<DVector<f64>> {
    let mut knots = vec![0.0];
    knots.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    knots.push(1.0);
    let mut total: Option<DVector<f64>> = None;
    let share = tol / (knots.len() - 1) as f64;
    for w in knots.windows(2) {
        let part = integrate(&f, w[0], w[1], share)?;
        total = Some(match total {
            Some(t) => t + part,
            None => part,
        });
    }
    Ok(total.expect("at least one interval"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate(
            |x| DVector::from_vec(vec![x * x, (11.0 * x).sin()]),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((v[1] - (1.0 - 11f64.cos()) / 11.0).abs() < 1e-11);
    }

    #[test]
    fn step_function_with_breakpoint() {
        let f = |x: f64| DVector::from_element(1, if x <= 0.3 { 1.0 } else { 2.0 });
        let v = integrate_unit(f, &[0.3], 1e-12).unwrap();
        assert!((v[0] - 1.7).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let f = |x: f64| DVector::from_element(1, if x > 0.0 { 1.0 / x } else { 0.0 });
        assert!(integrate(f, 0.0, 1.0, 1e-12).is_err());
    }
}
