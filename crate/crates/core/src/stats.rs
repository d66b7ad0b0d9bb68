//! Two-sample statistics: sample moments, the pivots `W`, `W_hat`, `U`
//! and pooled `T`, the large-sample confidence interval and test, and the
//! closed-form limit coefficients indexed by the sample-size ratio limit
//! `kappa` in `[0, inf]`.

use serde::{Deserialize, Serialize};

use crate::distributions::{phi, std_normal_quantile};
use crate::{domain, Error, Result};

/// Means and standard deviations of the two populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl PopulationParams {
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(mu1.is_finite() && mu2.is_finite()) {
            return domain("population means must be finite");
        }
        if !(sigma1 > 0.0 && sigma1.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return domain(format!(
                "population standard deviations must be positive, got ({sigma1}, {sigma2})"
            ));
        }
        Ok(PopulationParams {
            mu1,
            mu2,
            sigma1,
            sigma2,
        })
    }

    pub fn standard() -> Self {
        PopulationParams {
            mu1: 0.0,
            mu2: 0.0,
            sigma1: 1.0,
            sigma2: 1.0,
        }
    }

    pub fn mean_difference(&self) -> f64 {
        self.mu1 - self.mu2
    }
}

/// Two samples `X_{1,1..n1}` and `X_{2,1..n2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    xs1: Vec<f64>,
    xs2: Vec<f64>,
}

impl TwoSampleData {
    pub fn new(xs1: Vec<f64>, xs2: Vec<f64>) -> Result<Self> {
        if xs1.is_empty() || xs2.is_empty() {
            return domain("both samples must be nonempty");
        }
        if xs1.iter().chain(&xs2).any(|x| !x.is_finite()) {
            return domain("sample values must be finite");
        }
        Ok(TwoSampleData { xs1, xs2 })
    }

    /// Builds without validation; callers guarantee nonempty finite samples.
    pub(crate) fn from_parts(xs1: Vec<f64>, xs2: Vec<f64>) -> Self {
        debug_assert!(!xs1.is_empty() && !xs2.is_empty());
        TwoSampleData { xs1, xs2 }
    }

    pub fn xs1(&self) -> &[f64] {
        &self.xs1
    }

    pub fn xs2(&self) -> &[f64] {
        &self.xs2
    }

    pub fn n1(&self) -> usize {
        self.xs1.len()
    }

    pub fn n2(&self) -> usize {
        self.xs2.len()
    }

    /// `e = n1 / n2`.
    pub fn ratio(&self) -> f64 {
        self.n1() as f64 / self.n2() as f64
    }

    pub fn moments(&self) -> TwoSampleMoments {
        TwoSampleMoments {
            first: SampleMoments::of(&self.xs1),
            second: SampleMoments::of(&self.xs2),
        }
    }
}

/// Size, mean and unbiased variance of one sample. The variance is `None`
/// for a single observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub var: Option<f64>,
}

impl SampleMoments {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = (n >= 2).then(|| {
            let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
            ss / (n - 1) as f64
        });
        SampleMoments { n, mean, var }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn var_or_err(&self) -> Result<f64> {
        self.var
            .ok_or_else(|| Error::Domain("studentized statistics need at least 2 observations per sample".into()))
    }
}

/// Moments of both samples, computed once and shared by every statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleMoments {
    pub first: SampleMoments,
    pub second: SampleMoments,
}

impl TwoSampleMoments {
    fn ratio(&self) -> f64 {
        self.first.nf() / self.second.nf()
    }

    /// `S1^2/n1 + S2^2/n2`.
    fn welch_variance(&self) -> Result<f64> {
        let v = self.first.var_or_err()? / self.first.nf() + self.second.var_or_err()? / self.second.nf();
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::DegenerateVariance("S1^2/n1 + S2^2/n2 = 0"))
        }
    }

    fn centered_difference(&self, params: &PopulationParams) -> f64 {
        (self.first.mean - params.mu1) - (self.second.mean - params.mu2)
    }

    fn centered_sum(&self, params: &PopulationParams) -> f64 {
        (self.first.mean - params.mu1) + (self.second.mean - params.mu2)
    }

    pub fn pivot_w(&self, params: &PopulationParams) -> Result<f64> {
        Ok(self.centered_difference(params) / self.welch_variance()?.sqrt())
    }

    pub fn pivot_w_hat(&self, params: &PopulationParams) -> f64 {
        let known = params.sigma1 * params.sigma1 / self.first.nf()
            + params.sigma2 * params.sigma2 / self.second.nf();
        self.centered_difference(params) / known.sqrt()
    }

    pub fn pivot_u(&self, params: &PopulationParams) -> Result<f64> {
        Ok(self.centered_sum(params) / self.welch_variance()?.sqrt())
    }

    pub fn pooled_variance(&self) -> Result<f64> {
        let (n1, n2) = (self.first.n, self.second.n);
        if n1 + n2 < 3 {
            return domain(format!("pooled variance needs n1 + n2 >= 3, got {}", n1 + n2));
        }
        let ss = |m: &SampleMoments| m.var.map_or(0.0, |v| (m.n - 1) as f64 * v);
        Ok((ss(&self.first) + ss(&self.second)) / (n1 + n2 - 2) as f64)
    }

    pub fn pivot_t(&self, params: &PopulationParams) -> Result<f64> {
        let sp2 = self.pooled_variance()?;
        let scale = sp2 * (1.0 / self.first.nf() + 1.0 / self.second.nf());
        if !(scale > 0.0) {
            return Err(Error::DegenerateVariance("pooled variance is zero"));
        }
        Ok(self.centered_difference(params) / scale.sqrt())
    }

    pub fn confidence_interval(&self, level: f64) -> Result<ConfidenceInterval> {
        let z = two_sided_critical_value(level)?;
        let center = self.first.mean - self.second.mean;
        let half = z * self.welch_variance()?.sqrt();
        Ok(ConfidenceInterval {
            lo: center - half,
            hi: center + half,
            level,
        })
    }

    pub fn hypothesis_test(&self, d0: f64, level: f64) -> Result<TestResult> {
        check_open_unit(level, "significance level")?;
        let statistic = (self.first.mean - self.second.mean - d0) / self.welch_variance()?.sqrt();
        let p_value = (2.0 * phi(-statistic.abs())).min(1.0);
        Ok(TestResult {
            statistic,
            p_value,
            level,
            reject: p_value < level,
        })
    }

    pub fn scaling_factors(&self, params: &PopulationParams) -> Result<(f64, f64)> {
        let (s1, s2) = (self.first.var_or_err()?, self.second.var_or_err()?);
        let e = self.ratio();
        let d1 = s1 + e * s2;
        let d2 = s1 / e + s2;
        if !(d1 > 0.0 && d2 > 0.0) {
            return Err(Error::DegenerateVariance("S1^2 + e S2^2 = 0"));
        }
        Ok((params.sigma1 / d1.sqrt(), params.sigma2 / d2.sqrt()))
    }

    pub fn variance_ratio_q(&self, params: &PopulationParams) -> Result<f64> {
        let (s1, s2) = (self.first.var_or_err()?, self.second.var_or_err()?);
        let e = self.ratio();
        let den = s1 + e * s2;
        if !(den > 0.0) {
            return Err(Error::DegenerateVariance("S1^2 + e S2^2 = 0"));
        }
        Ok((params.sigma1 * params.sigma1 + e * params.sigma2 * params.sigma2) / den)
    }

    /// `(sqrt(n1) (X1bar - mu1) / sigma1, sqrt(n2) (X2bar - mu2) / sigma2)`.
    pub fn standardized_means(&self, params: &PopulationParams) -> (f64, f64) {
        (
            self.first.nf().sqrt() * (self.first.mean - params.mu1) / params.sigma1,
            self.second.nf().sqrt() * (self.second.mean - params.mu2) / params.sigma2,
        )
    }
}

fn check_open_unit(level: f64, what: &str) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        domain(format!("{what} {level} is outside (0, 1)"))
    }
}

/// `z_{alpha/2}` for confidence `level = 1 - alpha`.
fn two_sided_critical_value(level: f64) -> Result<f64> {
    check_open_unit(level, "confidence level")?;
    std_normal_quantile(0.5 + 0.5 * level)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Two-sided large-sample test of `mu1 - mu2 = d0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
}

pub fn sample_mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return domain("sample_mean: empty sample");
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return domain(format!("sample_variance: need at least 2 values, got {}", xs.len()));
    }
    SampleMoments::of(xs).var_or_err()
}

/// `((X1bar - mu1) - (X2bar - mu2)) / sqrt(S1^2/n1 + S2^2/n2)`.
pub fn pivot_w(data: &TwoSampleData, params: &PopulationParams) -> Result<f64> {
    data.moments().pivot_w(params)
}

/// [`pivot_w`] with the population variances in the denominator.
pub fn pivot_w_hat(data: &TwoSampleData, params: &PopulationParams) -> f64 {
    data.moments().pivot_w_hat(params)
}

/// `((X1bar - mu1) + (X2bar - mu2)) / sqrt(S1^2/n1 + S2^2/n2)`.
pub fn pivot_u(data: &TwoSampleData, params: &PopulationParams) -> Result<f64> {
    data.moments().pivot_u(params)
}

/// `((n1 - 1) S1^2 + (n2 - 1) S2^2) / (n1 + n2 - 2)`; a sample of size one
/// contributes nothing.
pub fn pooled_variance(data: &TwoSampleData) -> Result<f64> {
    data.moments().pooled_variance()
}

/// Two-sample t statistic studentized by the pooled variance.
pub fn pivot_t(data: &TwoSampleData, params: &PopulationParams) -> Result<f64> {
    data.moments().pivot_t(params)
}

/// `X1bar - X2bar -/+ z_{alpha/2} sqrt(S1^2/n1 + S2^2/n2)` with `alpha = 1 - level`.
pub fn confidence_interval(data: &TwoSampleData, level: f64) -> Result<ConfidenceInterval> {
    data.moments().confidence_interval(level)
}

/// Two-sided test at significance `level`; rejects iff `p < level`.
pub fn hypothesis_test(data: &TwoSampleData, d0: f64, level: f64) -> Result<TestResult> {
    data.moments().hypothesis_test(d0, level)
}

/// The factors `(v1, v2)` with `W = Y1 v1 - Y2 v2`, where `Yi` are the
/// standardized sample means:
/// `v1 = sigma1 / sqrt(S1^2 + e S2^2)`, `v2 = sigma2 / sqrt(S1^2 / e + S2^2)`.
pub fn scaling_factors(data: &TwoSampleData, params: &PopulationParams) -> Result<(f64, f64)> {
    data.moments().scaling_factors(params)
}

/// `Q = (sigma1^2 + e sigma2^2) / (S1^2 + e S2^2)`, so that `W = W_hat sqrt(Q)`.
pub fn variance_ratio_q(data: &TwoSampleData, params: &PopulationParams) -> Result<f64> {
    data.moments().variance_ratio_q(params)
}

/// A limit of sample-size ratios: a point of `[0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Kappa(f64);

impl Kappa {
    pub const ZERO: Kappa = Kappa(0.0);
    pub const ONE: Kappa = Kappa(1.0);
    pub const INFINITY: Kappa = Kappa(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(Kappa(value))
        } else {
            domain(format!("kappa must lie in [0, inf], got {value}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Limiting variance of the pooled-t pivot along a path with ratio limit
/// `kappa`: `(sigma1^2 + kappa sigma2^2) / (kappa sigma1^2 + sigma2^2)`.
pub fn theta_kappa(kappa: Kappa, params: &PopulationParams) -> f64 {
    let (v1, v2) = (params.sigma1 * params.sigma1, params.sigma2 * params.sigma2);
    if kappa.is_infinite() {
        v2 / v1
    } else {
        let k = kappa.value();
        (v1 + k * v2) / (k * v1 + v2)
    }
}

/// In-probability limits `(a1, a2)` of the scaling factors along a path
/// with ratio limit `kappa`; always `a1^2 + a2^2 = 1`.
pub fn limit_coefficients(kappa: Kappa, params: &PopulationParams) -> (f64, f64) {
    let (s1, s2) = (params.sigma1, params.sigma2);
    if kappa.is_infinite() {
        return (0.0, 1.0);
    }
    let k = kappa.value();
    if k == 0.0 {
        return (1.0, 0.0);
    }
    (
        s1 / (s1 * s1 + k * s2 * s2).sqrt(),
        s2 / (s1 * s1 / k + s2 * s2).sqrt(),
    )
}

/// The ratio limit whose first limit coefficient is `a1`:
/// `(sigma1 / sigma2)^2 (a1^-2 - 1)`, infinite at `a1 = 0`.
pub fn kappa_of_projection(a1: f64, params: &PopulationParams) -> Result<Kappa> {
    if !(0.0..=1.0).contains(&a1) {
        return domain(format!("a1 = {a1} is outside [0, 1]"));
    }
    if a1 == 0.0 {
        return Ok(Kappa::INFINITY);
    }
    let r = params.sigma1 / params.sigma2;
    Kappa::new((r * r * (1.0 / (a1 * a1) - 1.0)).max(0.0))
}
