//! Seeded paired-sample generators.
//!
//! Each draw is a pure function of `(model, n1, n2, seed, replication)`:
//! the ChaCha key is derived from `(seed, n1, n2)` and the replication
//! index selects the ChaCha stream, so replications can be produced in any
//! order or on any number of threads without changing a single bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::stats::{PopulationParams, TwoSampleData};
use crate::{domain, Result};

/// Master seed of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for one replication at one index point.
pub fn replication_rng(seed: Seed, n1: usize, n2: usize, replication: u64) -> ChaCha8Rng {
    let mut state = seed.0;
    for word in [n1 as u64, n2 as u64] {
        state = splitmix64(&mut state) ^ word;
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replication);
    rng
}

/// Marginal law of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    Normal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Marginal {
    pub fn standard_normal() -> Self {
        Marginal::Normal { mu: 0.0, sigma: 1.0 }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Normal { mu, .. } => mu,
            Marginal::Exponential { rate } => 1.0 / rate,
            Marginal::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            Marginal::Normal { sigma, .. } => sigma,
            Marginal::Exponential { rate } => 1.0 / rate,
            Marginal::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
        }
    }

    pub fn validate(&self, which: &str) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Marginal::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && hi > lo,
        };
        if ok {
            Ok(())
        } else {
            domain(format!("{which}: invalid parameters {self:?} (variance must be positive)"))
        }
    }

    fn is_normal(&self) -> bool {
        matches!(self, Marginal::Normal { .. })
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Normal { mu, sigma } => mu + sigma * rng.sample::<f64, _>(StandardNormal),
            Marginal::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// Per-index cross-sample correlation `rho_j`, `j = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RhoRule {
    /// `rho_j = rho`.
    Constant(f64),
    /// `rho_j = (-1)^j rho`.
    Alternating(f64),
    /// `rho_j = rho / j`.
    Decaying(f64),
}

impl RhoRule {
    pub fn amplitude(&self) -> f64 {
        match *self {
            RhoRule::Constant(r) | RhoRule::Alternating(r) | RhoRule::Decaying(r) => r,
        }
    }

    /// Correlation of pair `j` (one-based).
    pub fn rho_at(&self, j: u64) -> f64 {
        match *self {
            RhoRule::Constant(r) => r,
            RhoRule::Alternating(r) => {
                if j.is_multiple_of(2) {
                    r
                } else {
                    -r
                }
            }
            RhoRule::Decaying(r) => r / j as f64,
        }
    }

    /// `lim_k k^-1 sum_{j <= k} rho_j`.
    pub fn cesaro_limit(&self) -> f64 {
        match *self {
            RhoRule::Constant(r) => r,
            RhoRule::Alternating(_) | RhoRule::Decaying(_) => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RhoRule::Constant(_) => "constant",
            RhoRule::Alternating(_) => "alternating",
            RhoRule::Decaying(_) => "decaying:1/j",
        }
    }
}

/// Joint law of the pairs `(X_{1,j}, X_{2,j})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DependenceKind {
    /// The two coordinates are independent.
    IndependentMarginals,
    /// iid bivariate Normal pairs with correlation `rho`.
    GaussianCorrelated { rho: f64 },
    /// `X2 = mu2 + sigma2 R Z` with `X1 = mu1 + sigma1 Z`, `R` a fair sign
    /// independent of `Z`: uncorrelated but dependent.
    SignFlipDependent,
    /// Independent bivariate Normal pairs with correlation `rho_j`.
    TimeVaryingGaussian { rule: RhoRule },
}

impl DependenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DependenceKind::IndependentMarginals => "independent",
            DependenceKind::GaussianCorrelated { .. } => "gaussian_correlated",
            DependenceKind::SignFlipDependent => "sign_flip",
            DependenceKind::TimeVaryingGaussian { .. } => "time_varying",
        }
    }
}

/// A validated paired-sample model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedSampleModel {
    kind: DependenceKind,
    marginal1: Marginal,
    marginal2: Marginal,
}

impl PairedSampleModel {
    pub fn new(kind: DependenceKind, marginal1: Marginal, marginal2: Marginal) -> Result<Self> {
        marginal1.validate("marginal1")?;
        marginal2.validate("marginal2")?;
        let needs_normal = !matches!(kind, DependenceKind::IndependentMarginals);
        if needs_normal && !(marginal1.is_normal() && marginal2.is_normal()) {
            return domain(format!("{} requires Normal marginals", kind.name()));
        }
        let check_rho = |rho: f64| {
            if (-1.0..=1.0).contains(&rho) {
                Ok(())
            } else {
                domain(format!("rho = {rho} must satisfy |rho| <= 1"))
            }
        };
        match kind {
            DependenceKind::GaussianCorrelated { rho } => check_rho(rho)?,
            // every rule is bounded by its amplitude
            DependenceKind::TimeVaryingGaussian { rule } => check_rho(rule.amplitude())?,
            _ => {}
        }
        Ok(PairedSampleModel {
            kind,
            marginal1,
            marginal2,
        })
    }

    pub fn independent(marginal1: Marginal, marginal2: Marginal) -> Result<Self> {
        Self::new(DependenceKind::IndependentMarginals, marginal1, marginal2)
    }

    pub fn independent_standard() -> Self {
        Self::independent(Marginal::standard_normal(), Marginal::standard_normal())
            .expect("standard marginals are valid")
    }

    /// Standard Normal marginals with correlation `rho`.
    pub fn gaussian_correlated(rho: f64) -> Result<Self> {
        Self::new(
            DependenceKind::GaussianCorrelated { rho },
            Marginal::standard_normal(),
            Marginal::standard_normal(),
        )
    }

    pub fn sign_flip() -> Self {
        Self::new(
            DependenceKind::SignFlipDependent,
            Marginal::standard_normal(),
            Marginal::standard_normal(),
        )
        .expect("standard marginals are valid")
    }

    pub fn time_varying(rule: RhoRule) -> Result<Self> {
        Self::new(
            DependenceKind::TimeVaryingGaussian { rule },
            Marginal::standard_normal(),
            Marginal::standard_normal(),
        )
    }

    pub fn kind(&self) -> DependenceKind {
        self.kind
    }

    pub fn marginals(&self) -> (Marginal, Marginal) {
        (self.marginal1, self.marginal2)
    }

    pub fn params(&self) -> PopulationParams {
        PopulationParams {
            mu1: self.marginal1.mean(),
            mu2: self.marginal2.mean(),
            sigma1: self.marginal1.std_dev(),
            sigma2: self.marginal2.std_dev(),
        }
    }

    /// Limit of the Cesàro means of the cross-sample correlations.
    pub fn cesaro_limit(&self) -> f64 {
        match self.kind {
            DependenceKind::IndependentMarginals | DependenceKind::SignFlipDependent => 0.0,
            DependenceKind::GaussianCorrelated { rho } => rho,
            DependenceKind::TimeVaryingGaussian { rule } => rule.cesaro_limit(),
        }
    }

    /// Fills both samples from `rng`. Pairs are generated at matched
    /// indices `j < max(n1, n2)`. For independent marginals only the
    /// coordinates that are kept are generated, which leaves the joint law
    /// unchanged.
    fn fill<R: Rng>(&self, rng: &mut R, n1: usize, n2: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs1 = Vec::with_capacity(n1);
        let mut xs2 = Vec::with_capacity(n2);
        let k = n1.max(n2);
        let (m1, m2) = (self.marginal1, self.marginal2);
        match self.kind {
            DependenceKind::IndependentMarginals => {
                xs1.extend((0..n1).map(|_| m1.sample(rng)));
                xs2.extend((0..n2).map(|_| m2.sample(rng)));
            }
            DependenceKind::GaussianCorrelated { rho } => {
                let c = (1.0 - rho * rho).max(0.0).sqrt();
                self.gaussian_pairs(rng, n1, n2, k, |_| (rho, c), &mut xs1, &mut xs2);
            }
            DependenceKind::TimeVaryingGaussian { rule } => {
                self.gaussian_pairs(
                    rng,
                    n1,
                    n2,
                    k,
                    |j| {
                        let r = rule.rho_at(j as u64 + 1);
                        (r, (1.0 - r * r).max(0.0).sqrt())
                    },
                    &mut xs1,
                    &mut xs2,
                );
            }
            DependenceKind::SignFlipDependent => {
                let p = self.params();
                for j in 0..k {
                    let z: f64 = rng.sample(StandardNormal);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    if j < n1 {
                        xs1.push(p.mu1 + p.sigma1 * z);
                    }
                    if j < n2 {
                        xs2.push(p.mu2 + p.sigma2 * sign * z);
                    }
                }
            }
        }
        (xs1, xs2)
    }

    #[allow(clippy::too_many_arguments)]
    fn gaussian_pairs<R: Rng>(
        &self,
        rng: &mut R,
        n1: usize,
        n2: usize,
        k: usize,
        coeffs: impl Fn(usize) -> (f64, f64),
        xs1: &mut Vec<f64>,
        xs2: &mut Vec<f64>,
    ) {
        let p = self.params();
        for j in 0..k {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let (rho, c) = coeffs(j);
            if j < n1 {
                xs1.push(p.mu1 + p.sigma1 * z1);
            }
            if j < n2 {
                xs2.push(p.mu2 + p.sigma2 * (rho * z1 + c * z2));
            }
        }
    }
}

/// Draws `n1` first-sample and `n2` second-sample values for one replication.
pub fn draw_paired_sample(
    model: &PairedSampleModel,
    n1: usize,
    n2: usize,
    seed: Seed,
    replication: u64,
) -> Result<TwoSampleData> {
    if n1 == 0 || n2 == 0 {
        return domain(format!("sample sizes must be positive, got ({n1}, {n2})"));
    }
    let mut rng = replication_rng(seed, n1, n2, replication);
    let (xs1, xs2) = model.fill(&mut rng, n1, n2);
    Ok(TwoSampleData::from_parts(xs1, xs2))
}

/// Standardized sample means `(Y1, Y2)` of one replication, using the
/// model's true means and standard deviations.
pub fn standardized_means(
    model: &PairedSampleModel,
    n1: usize,
    n2: usize,
    seed: Seed,
    replication: u64,
) -> Result<(f64, f64)> {
    let data = draw_paired_sample(model, n1, n2, seed, replication)?;
    Ok(data.moments().standardized_means(&model.params()))
}

/// `k^-1 sum_{j <= k} rho_j`, evaluated from the model description.
pub fn cesaro_cross_correlation(model: &PairedSampleModel, k: u64) -> Result<f64> {
    if k == 0 {
        return domain("cesaro_cross_correlation: k must be positive");
    }
    Ok(match model.kind {
        DependenceKind::IndependentMarginals | DependenceKind::SignFlipDependent => 0.0,
        DependenceKind::GaussianCorrelated { rho } => rho,
        DependenceKind::TimeVaryingGaussian { rule } => match rule {
            RhoRule::Constant(r) => r,
            RhoRule::Alternating(r) => {
                if k.is_multiple_of(2) {
                    0.0
                } else {
                    -r / k as f64
                }
            }
            RhoRule::Decaying(_) => (1..=k).map(|j| rule.rho_at(j)).sum::<f64>() / k as f64,
        },
    })
}
