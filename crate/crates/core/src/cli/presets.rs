//! Named verification experiments with fixed thresholds.
//!
//! KS thresholds: accept below 0.03, reject above 0.05. At `R = 20000` the
//! KS sampling noise is about `1.36 / sqrt(R) = 0.0096`. The rejection
//! gaps are the exact sup distances between the limiting law and `Phi`:
//! `KS(N(0.5), Phi) = 0.0830`, `KS(N(17/8), Phi) = 0.0901`,
//! `KS(N(1.8), Phi) = 0.0706`.

use std::f64::consts::PI;

use crate::harness::{
    iterated_limit_coupling, lemma1_equivalence_check, rotation_invariance_diagnostic, run_coverage_experiment,
    run_pivot_experiment, EmpiricalSummary, ExperimentConfig, PivotKind, TargetSpec,
};
use crate::paths::{FixedCoordinate, IndexPath, IndexPoint, PathKind};
use crate::samplers::{Marginal, PairedSampleModel, RhoRule, Seed};
use crate::{domain, ExecutionPlan, Result};

use super::output::Row;

pub const PRESET_NAMES: [&str; 8] = [
    "prop1",
    "prop2",
    "prop3_independence",
    "remark6",
    "remark7",
    "lemma1",
    "coverage",
    "rotation",
];

pub const DEFAULT_SEED: u64 = 0x5EED;
const DEFAULT_REPS: u64 = 20_000;
const ACCEPT: f64 = 0.03;
const REJECT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetOptions {
    pub seed: Seed,
    /// Replaces every replication count in the preset.
    pub reps: Option<u64>,
    pub plan: ExecutionPlan,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            seed: Seed(DEFAULT_SEED),
            reps: None,
            plan: ExecutionPlan::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn below(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: value < bound,
            detail: format!("{value:.5} < {bound}"),
        }
    }

    fn above(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            passed: value > bound,
            detail: format!("{value:.5} > {bound}"),
        }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            detail: format!("{value:.5} in [{lo}, {hi}]"),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetReport {
    pub preset: &'static str,
    pub checks: Vec<Check>,
    /// One row per summary-producing experiment; diagnostics that are not
    /// pivot summaries (coupling, rotation, equivalence) only add checks.
    pub rows: Vec<Row>,
}

impl PresetReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Ctx {
    preset: &'static str,
    opts: PresetOptions,
    checks: Vec<Check>,
    rows: Vec<Row>,
}

impl Ctx {
    fn reps(&self, default: u64) -> u64 {
        self.opts.reps.unwrap_or(default)
    }

    fn config(&self, model: PairedSampleModel, path: IndexPath, pivot: PivotKind) -> ExperimentConfig {
        ExperimentConfig {
            model,
            path,
            pivot,
            replications: self.reps(DEFAULT_REPS),
            seed: self.opts.seed,
            levels: vec![0.95],
            target: TargetSpec::AutoFromPath,
            plan: self.opts.plan,
        }
    }

    /// Runs the experiment and returns the summary at the last path point.
    fn summary(&mut self, label: &str, config: ExperimentConfig, coverage: bool) -> Result<EmpiricalSummary> {
        let out = if coverage {
            run_coverage_experiment(&config)?
        } else {
            run_pivot_experiment(&config)?
        };
        let id = format!("{}/{label}", self.preset);
        for s in &out {
            self.rows.push(Row::new(&id, self.preset, &config, s));
        }
        Ok(out.last().expect("paths are nonempty").clone())
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn path(kind: &str, sizes: &[u64]) -> Result<IndexPath> {
    kind.parse::<PathKind>()?.build(sizes)
}

fn normal(mu: f64, sigma: f64) -> Marginal {
    Marginal::Normal { mu, sigma }
}

/// Runs a named preset. Unknown names are domain errors.
pub fn run_preset(name: &str, opts: PresetOptions) -> Result<PresetReport> {
    let preset = match PRESET_NAMES.iter().find(|p| **p == name) {
        Some(p) => *p,
        None => return domain(format!("unknown preset {name:?}; valid presets: {}", PRESET_NAMES.join(", "))),
    };
    if opts.reps == Some(0) {
        return domain("replications must be at least 1");
    }
    let mut ctx = Ctx {
        preset,
        opts,
        checks: Vec::new(),
        rows: Vec::new(),
    };
    match preset {
        "prop1" => prop1(&mut ctx)?,
        "prop2" => prop2(&mut ctx)?,
        "prop3_independence" => prop3(&mut ctx)?,
        "remark6" => remark6(&mut ctx)?,
        "remark7" => remark7(&mut ctx)?,
        "lemma1" => lemma1(&mut ctx)?,
        "coverage" => coverage(&mut ctx)?,
        "rotation" => rotation(&mut ctx)?,
        _ => unreachable!(),
    }
    Ok(PresetReport {
        preset,
        checks: ctx.checks,
        rows: ctx.rows,
    })
}

/// With `n2` pinned, `W` is close to `-sqrt(n2)(X2bar - mu2)/S2` once `n1`
/// is large, and that statistic is near `Phi` for large `n2`.
fn prop1(ctx: &mut Ctx) -> Result<()> {
    let model = PairedSampleModel::independent_standard();
    let (seed, plan) = (ctx.opts.seed, ctx.opts.plan);
    let near = iterated_limit_coupling(
        &model,
        IndexPoint::new(100_000, 20)?,
        FixedCoordinate::Second,
        ctx.reps(5_000),
        seed,
        plan,
    )?;
    ctx.check(Check::below("mean |W - inner| at (1e5, 20)", near.mean_abs_gap, 0.03));
    let inner = iterated_limit_coupling(
        &model,
        IndexPoint::new(2, 10_000)?,
        FixedCoordinate::Second,
        ctx.reps(DEFAULT_REPS),
        seed,
        plan,
    )?;
    ctx.check(Check::below("inner KS to Phi at n2 = 1e4", inner.ks_inner_to_phi, ACCEPT));
    Ok(())
}

fn prop2(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.config(
        PairedSampleModel::gaussian_correlated(0.5)?,
        path("diagonal", &[10_000])?,
        PivotKind::W,
    );
    let s = ctx.summary("corr0.5-diag", cfg, false)?;
    ctx.check(Check::within("emp_var near 1 - rho", s.emp_var, 0.45, 0.55));
    ctx.check(Check::above("KS to Phi", s.ks_to_phi, REJECT));
    ctx.check(Check::below("KS to N(0.5)", s.ks_to_target, ACCEPT));
    Ok(())
}

fn prop3(ctx: &mut Ctx) -> Result<()> {
    let std = PairedSampleModel::independent_standard();
    let expo = PairedSampleModel::independent(Marginal::Exponential { rate: 1.0 }, Marginal::Exponential { rate: 1.0 })?;
    let runs = [
        ("diagonal", std, "diagonal", 10_000),
        ("phi_zero", std, "phi_zero", 100),
        ("loglog", std, "loglog", 100),
        ("fixed_ratio4", std, "fixed_ratio:4", 2_500),
        ("exponential-diagonal", expo, "diagonal", 10_000),
    ];
    for (label, model, kind, size) in runs {
        let cfg = ctx.config(model, path(kind, &[size])?, PivotKind::W);
        let s = ctx.summary(label, cfg, false)?;
        let name = format!("{label} at ({}, {}): KS to Phi", s.point.n1, s.point.n2);
        ctx.check(Check::below(&name, s.ks_to_phi, ACCEPT));
    }
    Ok(())
}

fn remark6(ctx: &mut Ctx) -> Result<()> {
    let diag = path("diagonal", &[10_000])?;
    let s = ctx.summary("sign_flip", ctx.config(PairedSampleModel::sign_flip(), diag.clone(), PivotKind::W), false)?;
    ctx.check(Check::below("sign flip: KS to Phi", s.ks_to_phi, ACCEPT));
    let alt = PairedSampleModel::time_varying(RhoRule::Alternating(0.8))?;
    let s = ctx.summary("alternating0.8", ctx.config(alt, diag.clone(), PivotKind::W), false)?;
    ctx.check(Check::below("alternating rho: KS to Phi", s.ks_to_phi, ACCEPT));
    let cst = PairedSampleModel::time_varying(RhoRule::Constant(0.8))?;
    let s = ctx.summary("constant0.8", ctx.config(cst, diag, PivotKind::W), false)?;
    ctx.check(Check::within("constant rho: emp_var near 0.2", s.emp_var, 0.15, 0.25));
    Ok(())
}

fn remark7(ctx: &mut Ctx) -> Result<()> {
    let model = PairedSampleModel::independent(normal(0.0, 1.0), normal(0.0, 2.0))?;
    let s = ctx.summary("T-ratio4", ctx.config(model, path("fixed_ratio:4", &[5_000])?, PivotKind::T), false)?;
    ctx.check(Check::within("ratio 4: emp_var near 17/8", s.emp_var, 2.025, 2.225));
    ctx.check(Check::below("ratio 4: KS to N(17/8)", s.ks_to_target, ACCEPT));
    ctx.check(Check::above("ratio 4: KS to Phi", s.ks_to_phi, REJECT));
    let s = ctx.summary("T-diag", ctx.config(model, path("diagonal", &[10_000])?, PivotKind::T), false)?;
    ctx.check(Check::below("diagonal: KS to Phi", s.ks_to_phi, ACCEPT));
    Ok(())
}

fn lemma1(ctx: &mut Ctx) -> Result<()> {
    let r = lemma1_equivalence_check(
        &PairedSampleModel::independent_standard(),
        IndexPoint::new(10_000, 10_000)?,
        ctx.reps(DEFAULT_REPS),
        ctx.opts.seed,
        ctx.opts.plan,
    )?;
    ctx.check(Check::within("q_mean", r.q_mean, 0.98, 1.02));
    ctx.check(Check::below("KS(W, Phi)", r.ks_w, ACCEPT));
    ctx.check(Check::below("KS(W_hat, Phi)", r.ks_what, ACCEPT));
    ctx.check(Check::below("|KS(W) - KS(W_hat)|", (r.ks_w - r.ks_what).abs(), 0.02));
    Ok(())
}

fn coverage(ctx: &mut Ctx) -> Result<()> {
    let model = PairedSampleModel::independent(normal(0.0, 1.0), normal(0.0, 3.0))?;
    // round(0.4 * 500) = 200
    let cfg = ctx.config(model, path("fixed_ratio:0.4", &[500])?, PivotKind::W);
    let s = ctx.summary("normal1-normal3", cfg, true)?;
    let cov = s.coverage_at(0.95).expect("level 0.95 requested");
    let rej = s.rejection_at(0.95).expect("level 0.95 requested");
    ctx.check(Check::within("coverage at 0.95", cov, 0.94, 0.96));
    ctx.check(Check::below("|rejection - (1 - coverage)|", (rej - (1.0 - cov)).abs(), 1e-12));
    Ok(())
}

fn rotation(ctx: &mut Ctx) -> Result<()> {
    let point = IndexPoint::new(10_000, 10_000)?;
    let angles = [0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0];
    let (reps, seed, plan) = (ctx.reps(DEFAULT_REPS), ctx.opts.seed, ctx.opts.plan);
    let indep = rotation_invariance_diagnostic(&PairedSampleModel::independent_standard(), point, &angles, reps, seed, plan)?;
    let worst = indep.iter().map(|(_, d)| d.ks).fold(0.0, f64::max);
    ctx.check(Check::below("independent: max KS over angles", worst, ACCEPT));
    let corr = rotation_invariance_diagnostic(&PairedSampleModel::gaussian_correlated(0.8)?, point, &[PI / 4.0], reps, seed, plan)?;
    ctx.check(Check::above("rho 0.8: KS at pi/4", corr[0].1.ks, REJECT));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_preset_lists_names() {
        let e = run_preset("bogus", PresetOptions::default()).unwrap_err();
        let msg = e.to_string();
        for p in PRESET_NAMES {
            assert!(msg.contains(p), "{msg}");
        }
    }

    #[test]
    fn zero_reps_rejected() {
        let opts = PresetOptions {
            reps: Some(0),
            ..PresetOptions::default()
        };
        assert!(run_preset("prop2", opts).is_err());
    }

    #[test]
    fn check_lines() {
        assert_eq!(Check::below("a", 0.01, 0.03).line(), "PASS a: 0.01000 < 0.03");
        assert!(!Check::above("b", 0.01, 0.05).passed);
        assert!(Check::within("c", 0.5, 0.45, 0.55).passed);
    }
}
