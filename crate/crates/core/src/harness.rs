//! Seeded Monte Carlo over index paths.
//!
//! For every point of a path the harness draws `R` independent
//! replications, evaluates a pivot on each, and summarizes the empirical
//! law by its KS distance to the standard Normal and to the theoretical
//! target `N(theta)`. Replications whose studentizing denominator vanishes
//! are counted and dropped.
//!
//! Automatic target resolution (`TargetSpec::AutoFromPath`):
//!
//! | pivot       | model                          | path      | target                          |
//! |-------------|--------------------------------|-----------|---------------------------------|
//! | W, W_hat, U | Cesàro cross-correlation -> 0  | any       | `N(1)`                          |
//! | T           | Cesàro cross-correlation -> 0  | any       | `N(theta(kappa))`               |
//! | W, W_hat, T | Cesàro limit `c != 0`          | diagonal  | `N(1 - 2 c s1 s2 / (s1^2+s2^2))` |
//! | U           | Cesàro limit `c != 0`          | diagonal  | `N(1 + 2 c s1 s2 / (s1^2+s2^2))` |
//! | any         | Cesàro limit `c != 0`          | otherwise | `N(1)`, flagged as a fallback   |
//!
//! With standard Normal marginals and constant correlation `rho` the
//! diagonal row for `W` is `N(1 - rho)`.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{ks_distance_sorted, EmpiricalDistance, NormalTheta};
use crate::paths::{FixedCoordinate, IndexPath, IndexPoint, PathKind};
use crate::samplers::{draw_paired_sample, PairedSampleModel, Seed};
use crate::stats::{theta_kappa, PopulationParams, TwoSampleData, TwoSampleMoments};
use crate::{domain, Error, ExecutionPlan, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PivotKind {
    /// Studentized by `S1^2/n1 + S2^2/n2`.
    W,
    /// Standardized by the population variances.
    WHat,
    /// Sum of centered means, studentized like `W`.
    U,
    /// Pooled-variance t statistic.
    T,
}

impl PivotKind {
    pub fn evaluate(self, m: &TwoSampleMoments, params: &PopulationParams) -> Result<f64> {
        match self {
            PivotKind::W => m.pivot_w(params),
            PivotKind::WHat => Ok(m.pivot_w_hat(params)),
            PivotKind::U => m.pivot_u(params),
            PivotKind::T => m.pivot_t(params),
        }
    }
}

impl fmt::Display for PivotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PivotKind::W => "W",
            PivotKind::WHat => "WHat",
            PivotKind::U => "U",
            PivotKind::T => "T",
        })
    }
}

impl FromStr for PivotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" | "w" => Ok(PivotKind::W),
            "WHat" | "what" | "w_hat" => Ok(PivotKind::WHat),
            "U" | "u" => Ok(PivotKind::U),
            "T" | "t" => Ok(PivotKind::T),
            other => domain(format!("unknown pivot {other:?}; expected W, WHat, U or T")),
        }
    }
}

/// Reference law the empirical pivot distribution is scored against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    Phi,
    NormalTheta(f64),
    AutoFromPath,
}

/// A target law after resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTarget {
    pub law: NormalTheta,
    /// No table entry covered the combination and `N(1)` was used.
    pub fallback: bool,
}

/// Resolves [`TargetSpec::AutoFromPath`] per the table in the module docs.
pub fn resolve_auto_target(model: &PairedSampleModel, path: &IndexPath, pivot: PivotKind) -> ResolvedTarget {
    let params = model.params();
    let c = model.cesaro_limit();
    let exact = |theta: f64| ResolvedTarget {
        law: NormalTheta::new(theta.max(0.0)).expect("finite nonnegative variance"),
        fallback: false,
    };
    if c == 0.0 {
        return match pivot {
            PivotKind::T => exact(theta_kappa(path.kappa_target(), &params)),
            _ => exact(1.0),
        };
    }
    if path.kind() == PathKind::Diagonal {
        let cross = 2.0 * c * params.sigma1 * params.sigma2
            / (params.sigma1 * params.sigma1 + params.sigma2 * params.sigma2);
        return match pivot {
            PivotKind::U => exact(1.0 + cross),
            _ => exact(1.0 - cross),
        };
    }
    ResolvedTarget {
        law: NormalTheta::STANDARD,
        fallback: true,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: PairedSampleModel,
    pub path: IndexPath,
    pub pivot: PivotKind,
    pub replications: u64,
    pub seed: Seed,
    /// Confidence levels; the matching tests run at significance `1 - level`.
    pub levels: Vec<f64>,
    pub target: TargetSpec,
    pub plan: ExecutionPlan,
}

impl ExperimentConfig {
    pub fn new(model: PairedSampleModel, path: IndexPath, pivot: PivotKind, replications: u64, seed: u64) -> Self {
        ExperimentConfig {
            model,
            path,
            pivot,
            replications,
            seed: Seed(seed),
            levels: vec![0.95],
            target: TargetSpec::AutoFromPath,
            plan: ExecutionPlan::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return domain("replications must be at least 1");
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return domain(format!("level {l} is outside (0, 1)"));
        }
        if let TargetSpec::NormalTheta(theta) = self.target {
            NormalTheta::new(theta)?;
        }
        Ok(())
    }

    pub fn resolve_target(&self) -> ResolvedTarget {
        match self.target {
            TargetSpec::Phi => ResolvedTarget {
                law: NormalTheta::STANDARD,
                fallback: false,
            },
            TargetSpec::NormalTheta(theta) => ResolvedTarget {
                law: NormalTheta::new(theta).unwrap_or(NormalTheta::STANDARD),
                fallback: false,
            },
            TargetSpec::AutoFromPath => resolve_auto_target(&self.model, &self.path, self.pivot),
        }
    }
}

/// Fraction of replications meeting a criterion at one confidence level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRate {
    pub level: f64,
    pub rate: f64,
}

/// Empirical law of a pivot at one index point.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSummary {
    pub point: IndexPoint,
    pub ks_to_phi: f64,
    pub ks_to_target: f64,
    pub target_theta: f64,
    pub target_fallback: bool,
    pub emp_mean: f64,
    /// `n - 1` denominator; zero when a single replication survives.
    pub emp_var: f64,
    /// Share of intervals containing `mu1 - mu2`, per confidence level.
    pub coverage: Vec<LevelRate>,
    /// Share of tests rejecting the true `mu1 - mu2` at significance `1 - level`.
    pub rejection_rate: Vec<LevelRate>,
    pub degenerate_count: u64,
    pub replications: u64,
}

impl EmpiricalSummary {
    pub fn coverage_at(&self, level: f64) -> Option<f64> {
        self.coverage.iter().find(|r| r.level == level).map(|r| r.rate)
    }

    pub fn rejection_at(&self, level: f64) -> Option<f64> {
        self.rejection_rate.iter().find(|r| r.level == level).map(|r| r.rate)
    }
}

/// Anything that can produce one replication of two-sample data.
pub trait SampleSource: Sync {
    fn params(&self) -> PopulationParams;
    fn draw(&self, point: IndexPoint, seed: Seed, replication: u64) -> Result<TwoSampleData>;
}

impl SampleSource for PairedSampleModel {
    fn params(&self) -> PopulationParams {
        PairedSampleModel::params(self)
    }

    fn draw(&self, point: IndexPoint, seed: Seed, replication: u64) -> Result<TwoSampleData> {
        draw_paired_sample(self, point.n1 as usize, point.n2 as usize, seed, replication)
    }
}

struct Replicate {
    pivot: f64,
    covered: Vec<bool>,
    rejected: Vec<bool>,
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn summarize_point<S: SampleSource>(
    config: &ExperimentConfig,
    source: &S,
    point: IndexPoint,
    target: ResolvedTarget,
    with_coverage: bool,
) -> Result<EmpiricalSummary> {
    let params = source.params();
    let truth = params.mean_difference();
    let levels = &config.levels;
    let outcomes = config.plan.map_indexed(config.replications, |rep| -> Result<Option<Replicate>> {
        let data = source.draw(point, config.seed, rep)?;
        let m = data.moments();
        let pivot = match config.pivot.evaluate(&m, &params) {
            Ok(v) => v,
            Err(Error::DegenerateVariance(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let (mut covered, mut rejected) = (Vec::new(), Vec::new());
        if with_coverage {
            for &level in levels {
                covered.push(m.confidence_interval(level)?.contains(truth));
                rejected.push(m.hypothesis_test(truth, 1.0 - level)?.reject);
            }
        }
        Ok(Some(Replicate {
            pivot,
            covered,
            rejected,
        }))
    });

    let mut reps = Vec::with_capacity(outcomes.len());
    let mut degenerate = 0u64;
    for o in outcomes {
        match o? {
            Some(r) => reps.push(r),
            None => degenerate += 1,
        }
    }
    if reps.is_empty() {
        return Err(Error::Experiment {
            n1: point.n1,
            n2: point.n2,
            reason: format!("all {} replications had a degenerate variance", config.replications),
        });
    }

    let mut values: Vec<f64> = reps.iter().map(|r| r.pivot).collect();
    let (emp_mean, emp_var) = mean_and_var(&values);
    values.sort_unstable_by(f64::total_cmp);
    let ks_to_phi = ks_distance_sorted(&values, |x| NormalTheta::STANDARD.cdf(x)).ks;
    let ks_to_target = ks_distance_sorted(&values, |x| target.law.cdf(x)).ks;

    let valid = reps.len() as f64;
    let rate = |pick: fn(&Replicate) -> &Vec<bool>, i: usize| {
        reps.iter().filter(|r| pick(r)[i]).count() as f64 / valid
    };
    let (mut coverage, mut rejection_rate) = (Vec::new(), Vec::new());
    if with_coverage {
        for (i, &level) in levels.iter().enumerate() {
            coverage.push(LevelRate {
                level,
                rate: rate(|r| &r.covered, i),
            });
            rejection_rate.push(LevelRate {
                level,
                rate: rate(|r| &r.rejected, i),
            });
        }
    }

    Ok(EmpiricalSummary {
        point,
        ks_to_phi,
        ks_to_target,
        target_theta: target.law.theta(),
        target_fallback: target.fallback,
        emp_mean,
        emp_var,
        coverage,
        rejection_rate,
        degenerate_count: degenerate,
        replications: config.replications,
    })
}

/// Empirical pivot law at every point of the configured path.
pub fn run_pivot_experiment(config: &ExperimentConfig) -> Result<Vec<EmpiricalSummary>> {
    run_pivot_experiment_with(config, &config.model)
}

/// [`run_pivot_experiment`] drawing from an arbitrary source.
pub fn run_pivot_experiment_with<S: SampleSource>(
    config: &ExperimentConfig,
    source: &S,
) -> Result<Vec<EmpiricalSummary>> {
    config.validate()?;
    let target = config.resolve_target();
    config
        .path
        .points()
        .iter()
        .map(|&p| summarize_point(config, source, p, target, false))
        .collect()
}

/// Pivot law plus interval coverage and null rejection rates of the
/// large-sample interval and test for `mu1 - mu2`.
pub fn run_coverage_experiment(config: &ExperimentConfig) -> Result<Vec<EmpiricalSummary>> {
    run_coverage_experiment_with(config, &config.model)
}

pub fn run_coverage_experiment_with<S: SampleSource>(
    config: &ExperimentConfig,
    source: &S,
) -> Result<Vec<EmpiricalSummary>> {
    config.validate()?;
    if config.pivot != PivotKind::W {
        return domain(format!(
            "coverage experiments use the interval built on W, got pivot {}",
            config.pivot
        ));
    }
    let target = config.resolve_target();
    config
        .path
        .points()
        .iter()
        .map(|&p| summarize_point(config, source, p, target, true))
        .collect()
}

/// KS distance to the standard Normal of the projection of the
/// standardized means onto `(cos t, sin t)`, for each angle `t`.
pub fn rotation_invariance_diagnostic(
    model: &PairedSampleModel,
    point: IndexPoint,
    angles: &[f64],
    replications: u64,
    seed: Seed,
    plan: ExecutionPlan,
) -> Result<Vec<(f64, EmpiricalDistance)>> {
    if replications < 100 {
        return domain(format!("rotation diagnostic needs at least 100 replications, got {replications}"));
    }
    if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
        return domain(format!("angle {a} is not finite"));
    }
    let ys = standardized_mean_draws(model, point, replications, seed, plan)?;
    Ok(angles
        .iter()
        .map(|&t| {
            let (c, s) = (t.cos(), t.sin());
            let mut proj: Vec<f64> = ys.iter().map(|&(y1, y2)| c * y1 + s * y2).collect();
            proj.sort_unstable_by(f64::total_cmp);
            (t, ks_distance_sorted(&proj, |x| NormalTheta::STANDARD.cdf(x)))
        })
        .collect())
}

/// `R` draws of the standardized means `(Y1, Y2)` at `point`.
pub fn standardized_mean_draws<S: SampleSource>(
    source: &S,
    point: IndexPoint,
    replications: u64,
    seed: Seed,
    plan: ExecutionPlan,
) -> Result<Vec<(f64, f64)>> {
    let params = source.params();
    plan.map_indexed(replications, |rep| {
        let data = source.draw(point, seed, rep)?;
        Ok(data.moments().standardized_means(&params))
    })
    .into_iter()
    .collect()
}

/// Paired comparison of the studentized and the known-variance pivots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub ks_w: f64,
    pub ks_what: f64,
    /// Mean of `(sigma1^2 + e sigma2^2) / (S1^2 + e S2^2)`.
    pub q_mean: f64,
    pub degenerate_count: u64,
}

pub fn lemma1_equivalence_check<S: SampleSource>(
    source: &S,
    point: IndexPoint,
    replications: u64,
    seed: Seed,
    plan: ExecutionPlan,
) -> Result<Lemma1Report> {
    if replications < 100 {
        return domain(format!("equivalence check needs at least 100 replications, got {replications}"));
    }
    let params = source.params();
    let outcomes = plan.map_indexed(replications, |rep| -> Result<Option<(f64, f64, f64)>> {
        let m = source.draw(point, seed, rep)?.moments();
        match (m.pivot_w(&params), m.variance_ratio_q(&params)) {
            (Ok(w), Ok(q)) => Ok(Some((w, m.pivot_w_hat(&params), q))),
            (Err(Error::DegenerateVariance(_)), _) | (_, Err(Error::DegenerateVariance(_))) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    let mut triples = Vec::with_capacity(outcomes.len());
    let mut degenerate = 0;
    for o in outcomes {
        match o? {
            Some(t) => triples.push(t),
            None => degenerate += 1,
        }
    }
    if triples.is_empty() {
        return Err(Error::Experiment {
            n1: point.n1,
            n2: point.n2,
            reason: "all replications had a degenerate variance".into(),
        });
    }
    let q_mean = triples.iter().map(|t| t.2).sum::<f64>() / triples.len() as f64;
    let ks_of = |mut v: Vec<f64>| {
        v.sort_unstable_by(f64::total_cmp);
        ks_distance_sorted(&v, |x| NormalTheta::STANDARD.cdf(x)).ks
    };
    Ok(Lemma1Report {
        ks_w: ks_of(triples.iter().map(|t| t.0).collect()),
        ks_what: ks_of(triples.iter().map(|t| t.1).collect()),
        q_mean,
        degenerate_count: degenerate,
    })
}

/// The inner limit of `W` when one sample size is pinned and the other
/// grows: `-sqrt(n2)(X2bar - mu2)/S2` with `n2` pinned, and
/// `sqrt(n1)(X1bar - mu1)/S1` with `n1` pinned.
pub fn inner_limit_statistic(m: &TwoSampleMoments, params: &PopulationParams, fixed: FixedCoordinate) -> Result<f64> {
    let (sm, mu, sign) = match fixed {
        FixedCoordinate::Second => (m.second, params.mu2, -1.0),
        FixedCoordinate::First => (m.first, params.mu1, 1.0),
    };
    let var = sm.var.ok_or_else(|| Error::Domain("pinned sample needs at least 2 observations".into()))?;
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance("pinned sample is constant"));
    }
    Ok(sign * (sm.n as f64).sqrt() * (sm.mean - mu) / var.sqrt())
}

/// Distance between `W` and its inner iterated limit at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    /// Mean over replications of `|W - inner|`.
    pub mean_abs_gap: f64,
    /// KS distance of the inner statistic to the standard Normal.
    pub ks_inner_to_phi: f64,
    pub degenerate_count: u64,
}

pub fn iterated_limit_coupling<S: SampleSource>(
    source: &S,
    point: IndexPoint,
    fixed: FixedCoordinate,
    replications: u64,
    seed: Seed,
    plan: ExecutionPlan,
) -> Result<CouplingReport> {
    if replications == 0 {
        return domain("replications must be at least 1");
    }
    let params = source.params();
    let outcomes = plan.map_indexed(replications, |rep| -> Result<Option<(f64, f64)>> {
        let m = source.draw(point, seed, rep)?.moments();
        match (m.pivot_w(&params), inner_limit_statistic(&m, &params, fixed)) {
            (Ok(w), Ok(inner)) => Ok(Some((w, inner))),
            (Err(Error::DegenerateVariance(_)), _) | (_, Err(Error::DegenerateVariance(_))) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    let mut pairs = Vec::with_capacity(outcomes.len());
    let mut degenerate = 0;
    for o in outcomes {
        match o? {
            Some(p) => pairs.push(p),
            None => degenerate += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::Experiment {
            n1: point.n1,
            n2: point.n2,
            reason: "all replications had a degenerate variance".into(),
        });
    }
    let mean_abs_gap = pairs.iter().map(|(w, i)| (w - i).abs()).sum::<f64>() / pairs.len() as f64;
    let mut inner: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    inner.sort_unstable_by(f64::total_cmp);
    Ok(CouplingReport {
        mean_abs_gap,
        ks_inner_to_phi: ks_distance_sorted(&inner, |x| NormalTheta::STANDARD.cdf(x)).ks,
        degenerate_count: degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{diagonal_path, fixed_ratio_path};
    use crate::samplers::{Marginal, RhoRule};
    use crate::stats::Kappa;

    /// Replays fixed data regardless of the replication index.
    struct Fixture {
        data: Vec<TwoSampleData>,
        params: PopulationParams,
    }

    impl SampleSource for Fixture {
        fn params(&self) -> PopulationParams {
            self.params
        }

        fn draw(&self, _: IndexPoint, _: Seed, rep: u64) -> Result<TwoSampleData> {
            Ok(self.data[rep as usize % self.data.len()].clone())
        }
    }

    fn small_config(model: PairedSampleModel, ks: &[u64], pivot: PivotKind, reps: u64) -> ExperimentConfig {
        ExperimentConfig::new(model, diagonal_path(ks).unwrap(), pivot, reps, 7)
    }

    #[test]
    fn single_replication_mean_is_the_pivot() {
        let model = PairedSampleModel::independent_standard();
        let cfg = small_config(model, &[30], PivotKind::W, 1);
        let s = &run_pivot_experiment(&cfg).unwrap()[0];
        let d = draw_paired_sample(&model, 30, 30, Seed(7), 0).unwrap();
        let w = crate::stats::pivot_w(&d, &model.params()).unwrap();
        assert_eq!(s.emp_mean, w);
        assert_eq!(s.emp_var, 0.0);
        assert_eq!((s.replications, s.degenerate_count), (1, 0));
    }

    #[test]
    fn one_summary_per_point() {
        let cfg = small_config(PairedSampleModel::independent_standard(), &[5, 10, 20], PivotKind::T, 50);
        let out = run_pivot_experiment(&cfg).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[2].point, IndexPoint { n1: 20, n2: 20 });
        for s in &out {
            assert!(s.ks_to_phi >= 0.5 / 50.0 && s.ks_to_phi <= 1.0);
            assert!(s.coverage.is_empty());
        }
    }

    #[test]
    fn plans_give_identical_summaries() {
        let mut cfg = small_config(
            PairedSampleModel::gaussian_correlated(0.4).unwrap(),
            &[10, 40],
            PivotKind::U,
            300,
        );
        cfg.plan = ExecutionPlan::Sequential;
        let a = run_coverage_experiment(&ExperimentConfig {
            pivot: PivotKind::W,
            ..cfg.clone()
        })
        .unwrap();
        let b = run_coverage_experiment(&ExperimentConfig {
            pivot: PivotKind::W,
            plan: ExecutionPlan::Workers(3),
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(a, b);
        let c = run_pivot_experiment(&cfg).unwrap();
        let d = run_pivot_experiment(&ExperimentConfig {
            plan: ExecutionPlan::Parallel,
            ..cfg
        })
        .unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn degenerate_replications_are_counted() {
        let params = PopulationParams::standard();
        let good = TwoSampleData::new(vec![0.0, 1.0], vec![0.5, -0.5]).unwrap();
        let flat = TwoSampleData::new(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let fixture = Fixture {
            data: vec![good, flat.clone()],
            params,
        };
        let cfg = small_config(PairedSampleModel::independent_standard(), &[2], PivotKind::W, 10);
        let s = &run_pivot_experiment_with(&cfg, &fixture).unwrap()[0];
        assert_eq!(s.degenerate_count, 5);
        assert_eq!(s.replications, 10);

        let all_flat = Fixture {
            data: vec![flat],
            params,
        };
        assert!(matches!(
            run_pivot_experiment_with(&cfg, &all_flat),
            Err(Error::Experiment { n1: 2, n2: 2, .. })
        ));
    }

    #[test]
    fn coverage_is_one_when_interval_always_covers() {
        // symmetric around the truth with a wide interval
        let fixture = Fixture {
            data: vec![TwoSampleData::new(vec![-1.0, 1.0], vec![-1.0, 1.0]).unwrap()],
            params: PopulationParams::standard(),
        };
        let mut cfg = small_config(PairedSampleModel::independent_standard(), &[2], PivotKind::W, 20);
        cfg.levels = vec![0.5, 0.95];
        let s = &run_coverage_experiment_with(&cfg, &fixture).unwrap()[0];
        assert_eq!(s.coverage_at(0.95), Some(1.0));
        assert_eq!(s.coverage_at(0.5), Some(1.0));
        assert_eq!(s.rejection_at(0.95), Some(0.0));
    }

    #[test]
    fn rejection_complements_coverage() {
        let model = PairedSampleModel::independent(
            Marginal::Normal { mu: 0.0, sigma: 1.0 },
            Marginal::Normal { mu: 0.0, sigma: 3.0 },
        )
        .unwrap();
        let mut cfg = small_config(model, &[8, 25], PivotKind::W, 2000);
        cfg.levels = vec![0.8, 0.9, 0.95, 0.99];
        for s in run_coverage_experiment(&cfg).unwrap() {
            for l in &cfg.levels {
                let c = s.coverage_at(*l).unwrap();
                let r = s.rejection_at(*l).unwrap();
                assert!((r - (1.0 - c)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coverage_requires_w() {
        let cfg = small_config(PairedSampleModel::independent_standard(), &[5], PivotKind::T, 10);
        assert!(run_coverage_experiment(&cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config(PairedSampleModel::independent_standard(), &[5], PivotKind::W, 0);
        assert!(run_pivot_experiment(&cfg).is_err());
        cfg.replications = 10;
        cfg.levels = vec![1.0];
        assert!(run_pivot_experiment(&cfg).is_err());
        cfg.levels = vec![0.9];
        cfg.target = TargetSpec::NormalTheta(-1.0);
        assert!(run_pivot_experiment(&cfg).is_err());
    }

    #[test]
    fn auto_target_table() {
        let diag = diagonal_path(&[10]).unwrap();
        let ratio4 = fixed_ratio_path(4.0, &[10]).unwrap();
        let indep = PairedSampleModel::independent(
            Marginal::Normal { mu: 0.0, sigma: 1.0 },
            Marginal::Normal { mu: 0.0, sigma: 2.0 },
        )
        .unwrap();
        let t = resolve_auto_target(&indep, &ratio4, PivotKind::T);
        assert_eq!((t.law.theta(), t.fallback), (2.125, false));
        assert_eq!(resolve_auto_target(&indep, &diag, PivotKind::T).law.theta(), 1.0);
        assert_eq!(resolve_auto_target(&indep, &ratio4, PivotKind::W).law.theta(), 1.0);

        let corr = PairedSampleModel::gaussian_correlated(0.5).unwrap();
        assert_eq!(resolve_auto_target(&corr, &diag, PivotKind::W).law.theta(), 0.5);
        assert_eq!(resolve_auto_target(&corr, &diag, PivotKind::U).law.theta(), 1.5);
        let fb = resolve_auto_target(&corr, &ratio4, PivotKind::W);
        assert!(fb.fallback);
        assert_eq!(fb.law.theta(), 1.0);

        let alt = PairedSampleModel::time_varying(RhoRule::Alternating(0.8)).unwrap();
        assert_eq!(resolve_auto_target(&alt, &diag, PivotKind::W).law.theta(), 1.0);
        let cst = PairedSampleModel::time_varying(RhoRule::Constant(0.8)).unwrap();
        assert!((resolve_auto_target(&cst, &diag, PivotKind::W).law.theta() - 0.2).abs() < 1e-15);

        let p = PopulationParams::new(0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(theta_kappa(Kappa::new(4.0).unwrap(), &p), 2.125);
    }

    #[test]
    fn rotation_angle_zero_is_first_coordinate() {
        let model = PairedSampleModel::gaussian_correlated(0.3).unwrap();
        let point = IndexPoint { n1: 20, n2: 30 };
        let plan = ExecutionPlan::Sequential;
        let out = rotation_invariance_diagnostic(&model, point, &[0.0], 200, Seed(1), plan).unwrap();
        let ys = standardized_mean_draws(&model, point, 200, Seed(1), plan).unwrap();
        let mut y1: Vec<f64> = ys.iter().map(|y| y.0).collect();
        y1.sort_by(f64::total_cmp);
        let want = ks_distance_sorted(&y1, |x| NormalTheta::STANDARD.cdf(x));
        assert_eq!(out[0].1, want);
    }

    #[test]
    fn rotation_input_checks() {
        let model = PairedSampleModel::independent_standard();
        let p = IndexPoint { n1: 5, n2: 5 };
        let plan = ExecutionPlan::Sequential;
        assert!(rotation_invariance_diagnostic(&model, p, &[0.0], 99, Seed(0), plan).is_err());
        assert!(rotation_invariance_diagnostic(&model, p, &[f64::NAN], 100, Seed(0), plan).is_err());
    }

    #[test]
    fn lemma1_fixture_with_exact_variances() {
        // S_i^2 = 1 = sigma_i^2 in every replication
        let params = PopulationParams::standard();
        let fixture = Fixture {
            data: vec![
                TwoSampleData::new(vec![-1.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).unwrap(),
                TwoSampleData::new(vec![4.0, 3.0, 2.0], vec![-1.0, 1.0, 0.0]).unwrap(),
            ],
            params,
        };
        let r = lemma1_equivalence_check(&fixture, IndexPoint { n1: 3, n2: 3 }, 100, Seed(0), ExecutionPlan::Sequential)
            .unwrap();
        assert_eq!(r.q_mean, 1.0);
        assert_eq!(r.ks_w, r.ks_what);
    }

    #[test]
    fn inner_limit_statistic_matches_definition() {
        let d = TwoSampleData::new(vec![1.0, 2.0, 3.0], vec![0.0, 2.0]).unwrap();
        let m = d.moments();
        let p = PopulationParams::new(1.5, 0.5, 1.0, 1.0).unwrap();
        let s2 = inner_limit_statistic(&m, &p, FixedCoordinate::Second).unwrap();
        assert!((s2 - (-(2f64.sqrt()) * 0.5 / 2f64.sqrt())).abs() < 1e-15);
        let s1 = inner_limit_statistic(&m, &p, FixedCoordinate::First).unwrap();
        assert!((s1 - 3f64.sqrt() * 0.5).abs() < 1e-15);
    }
}
