//! Paired t-tests on top of a self-contained Student-t CDF.
//!
//! The CDF is evaluated through the regularized incomplete beta function
//! with Lentz continued fractions, so no statistics library is involved.

use serde::Serialize;

use crate::error::{Error, Result};

/// ln Γ(x) for x > 0 (Lanczos approximation, g=7, n=9).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)] // canonical published coefficients
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    #[allow(clippy::excessive_precision)]
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
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
    h
}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1]. Absolute error well below 1e-10 over the tested domain.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        a * x.ln() + b * (1.0 - x).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * betacf(a, b, x) / a
    } else {
        1.0 - front * betacf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of a Student-t statistic with the given degrees of
/// freedom: `I_{df/(df+t^2)}(df/2, 1/2)`. Underflow is floored so the
/// result stays inside (0, 1].
pub fn student_t_two_sided_p(t: f64, df: usize) -> f64 {
    debug_assert!(df >= 1);
    let nu = df as f64;
    let x = nu / (nu + t * t);
    regularized_incomplete_beta(nu / 2.0, 0.5, x).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Result of a paired t-test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TTestResult {
    pub t: f64,
    /// Degrees of freedom, n - 1.
    pub df: usize,
    pub p_two_sided: f64,
    pub n: usize,
}

/// Paired t-test on two equal-length samples: d = a - b,
/// t = mean(d) / (sd(d) / sqrt(n)) with the sample (n-1) standard deviation.
///
/// Identical samples are the forced case t = 0, p = 1; nonzero constant
/// differences have no finite statistic and are rejected.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::Arity(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Arity(format!("paired t-test needs n >= 2, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);

    if var == 0.0 {
        if mean == 0.0 {
            return Ok(TTestResult { t: 0.0, df: n - 1, p_two_sided: 1.0, n });
        }
        return Err(Error::Degenerate(
            "differences are a nonzero constant; the t statistic is unbounded".into(),
        ));
    }

    let t = mean / (var.sqrt() / nf.sqrt());
    Ok(TTestResult { t, df: n - 1, p_two_sided: student_t_two_sided_p(t, n - 1), n })
}
