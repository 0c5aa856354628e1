//! Welch's two-sample t-test with one-sided p-values.
//!
//! The Student-t tail is evaluated through the regularized incomplete beta
//! function, `P(T > t) = I_x(df/2, 1/2) / 2` with `x = df / (df + t²)`, using
//! a modified Lentz continued fraction.

use thiserror::Error;

use crate::influence::CurvePoint;
use crate::numfmt::sig10;

const CF_MAX_ITER: usize = 300;
const CF_EPS: f64 = 1e-14;
const CF_TINY: f64 = 1e-300;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("both samples have zero variance")]
    DegenerateSamples,
    #[error("each sample needs at least 2 observations (got {0})")]
    TooFewObservations(u64),
    #[error("invalid argument: {0}")]
    Domain(&'static str),
    #[error("curve has no point for n = {0}")]
    MissingGroup(usize),
    #[error("continued fraction did not converge for a = {a}, b = {b}, x = {x}")]
    NoConvergence { a: f64, b: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub count: u64,
}

impl From<&CurvePoint> for SampleSummary {
    fn from(p: &CurvePoint) -> Self {
        SampleSummary { mean: p.mean, variance: p.variance, count: p.instances }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropTestResult {
    pub n1: usize,
    pub n2: usize,
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for Pr(n1) > Pr(n2).
    pub p: f64,
}

impl DropTestResult {
    /// `n1,n2,t,df,p` with ten significant digits.
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{}", self.n1, self.n2, sig10(self.t), sig10(self.df), sig10(self.p))
    }
}

/// Welch t statistic and Welch–Satterthwaite degrees of freedom.
pub fn welch_t(s1: &SampleSummary, s2: &SampleSummary) -> Result<(f64, f64), StatsError> {
    for s in [s1, s2] {
        if s.count < 2 {
            return Err(StatsError::TooFewObservations(s.count));
        }
        if !s.mean.is_finite() || !s.variance.is_finite() || s.variance < 0.0 {
            return Err(StatsError::Domain("sample moments must be finite with non-negative variance"));
        }
    }
    if s1.variance == 0.0 && s2.variance == 0.0 {
        return Err(StatsError::DegenerateSamples);
    }
    let (n1, n2) = (s1.count as f64, s2.count as f64);
    let (q1, q2) = (s1.variance / n1, s2.variance / n2);
    let se2 = q1 + q2;
    let t = (s1.mean - s2.mean) / se2.sqrt();
    let df = se2 * se2 / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
    Ok((t, df))
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn one_sided_p(t: f64, df: f64) -> Result<f64, StatsError> {
    if !t.is_finite() || !df.is_finite() {
        return Err(StatsError::Domain("t and df must be finite"));
    }
    if df <= 0.0 {
        return Err(StatsError::Domain("df must be positive"));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let t2 = t * t;
    let denom = df + t2;
    let x = df / denom;
    let y = t2 / denom;
    let ln_x = -(t2 / df).ln_1p();
    let ln_y = 2.0 * t.abs().ln() - denom.ln();
    let tail = 0.5 * inc_beta_split(0.5 * df, 0.5, x, y, ln_x, ln_y)?;
    Ok(if t > 0.0 { tail } else { 1.0 - tail })
}

/// One-sided Welch test of H1: Pr(n1) > Pr(n2) on two points of a curve.
pub fn test_drop(curve: &[CurvePoint], n1: usize, n2: usize) -> Result<DropTestResult, StatsError> {
    let find = |n: usize| curve.iter().find(|p| p.n == n).ok_or(StatsError::MissingGroup(n));
    let (a, b) = (find(n1)?, find(n2)?);
    let (t, df) = welch_t(&a.into(), &b.into())?;
    let p = one_sided_p(t, df)?;
    Ok(DropTestResult { n1, n2, t, df, p })
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64, StatsError> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(StatsError::Domain("need a, b > 0 and 0 <= x <= 1"));
    }
    let y = 1.0 - x;
    inc_beta_split(a, b, x, y, x.ln(), y.ln())
}

/// `I_x(a, b)` given `x`, `y = 1 - x` and both logarithms, each computed by
/// the caller without cancellation.
fn inc_beta_split(a: f64, b: f64, x: f64, y: f64, ln_x: f64, ln_y: f64) -> Result<f64, StatsError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_front = a * ln_x + b * ln_y - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(b, a, y)? / b)
    }
}

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clip = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clip(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clip(1.0 + even * d);
        c = clip(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clip(1.0 + odd * d);
        c = clip(1.0 + odd / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(StatsError::NoConvergence { a, b, x })
}

/// Stirling-series remainder `ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)]`,
/// valid for x >= 10.
fn stirling_remainder(x: f64) -> f64 {
    const C: [f64; 7] =
        [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln Γ(x)` for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift += z.ln();
        z += 1.0;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_remainder(z) - shift
}

/// `ln B(a, b)`, arranged to avoid cancellation when either argument is large.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (p, q) = if a < b { (a, b) } else { (b, a) };
    let sum = p + q;
    if p >= 10.0 {
        let corr = stirling_remainder(p) + stirling_remainder(q) - stirling_remainder(sum);
        -0.5 * q.ln() + HALF_LN_2PI + corr + (p - 0.5) * (p / sum).ln() + q * (-p / sum).ln_1p()
    } else if q >= 10.0 {
        let corr = stirling_remainder(q) - stirling_remainder(sum);
        ln_gamma(p) + corr + p - p * sum.ln() + (q - 0.5) * (-p / sum).ln_1p()
    } else {
        ln_gamma(p) + ln_gamma(q) - ln_gamma(sum)
    }
}
