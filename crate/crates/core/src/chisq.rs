//! Chi-square reference distribution.
//!
//! The survival function is the regularized upper incomplete gamma function
//! `Q(df/2, x/2)`, evaluated by its power series below `a + 1` and by a
//! modified Lentz continued fraction above.

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn lower_series(a: f64, x: f64, ln_prefix: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * ln_prefix.exp()
}

fn upper_fraction(a: f64, x: f64, ln_prefix: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    ln_prefix.exp() * h
}

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        (1.0 - lower_series(a, x, ln_prefix)).clamp(0.0, 1.0)
    } else {
        upper_fraction(a, x, ln_prefix).clamp(0.0, 1.0)
    }
}

/// `P(χ²_df > x)`.
pub fn chi_square_survival(x: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidArgument(
            "chi-square degrees of freedom must be positive".into(),
        ));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "chi-square argument must be nonnegative, got {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(regularized_gamma_q(df as f64 / 2.0, x / 2.0))
}

/// The `1 - alpha` quantile of `χ²_df`, i.e. the `x` with survival `alpha`.
pub fn chi_square_quantile(alpha: f64, df: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail probability must lie in (0, 1), got {alpha}"
        )));
    }
    let sf = |x: f64| chi_square_survival(x, df);
    let mut lo = 0.0;
    let mut hi = df as f64 + 10.0;
    while sf(hi)? > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn five_percent_critical_values() {
        assert!((chi_square_survival(3.841, 1).unwrap() - 0.05).abs() < 1e-4);
        assert!((chi_square_survival(5.991, 2).unwrap() - 0.05).abs() < 1e-4);
    }

    #[test]
    fn survival_at_zero_is_one() {
        for df in 1..20 {
            assert_eq!(chi_square_survival(0.0, df).unwrap(), 1.0);
        }
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(chi_square_survival(-1.0, 2).is_err());
        assert!(chi_square_survival(1.0, 0).is_err());
    }

    #[test]
    fn matches_independent_implementation() {
        for df in [1usize, 2, 3, 4, 5, 7, 10, 25, 60] {
            let reference = ChiSquared::new(df as f64).unwrap();
            for i in 0..400 {
                let x = i as f64 * 0.25;
                let ours = chi_square_survival(x, df).unwrap();
                let theirs = reference.sf(x);
                assert!(
                    (ours - theirs).abs() <= 1e-10,
                    "df={df} x={x}: {ours} vs {theirs}"
                );
            }
        }
    }

    #[test]
    fn quantile_inverts_survival() {
        for df in [1usize, 2, 4, 9] {
            for alpha in [0.01, 0.05, 0.1, 0.5] {
                let q = chi_square_quantile(alpha, df).unwrap();
                assert!((chi_square_survival(q, df).unwrap() - alpha).abs() < 1e-12);
            }
        }
        assert!((chi_square_quantile(0.05, 1).unwrap() - 3.841_458_820_694_124).abs() < 1e-9);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }
}
