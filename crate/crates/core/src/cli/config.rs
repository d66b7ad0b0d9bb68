//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "gaussian_correlated"   # independent | gaussian_correlated | sign_flip | time_varying
//! rho = 0.5                      # correlation, or the amplitude of rho_rule
//! rho_rule = "alternating"       # time_varying only: constant | alternating | decaying
//! marginal1 = { family = "normal", mu = 0.0, sigma = 1.0 }
//! marginal2 = { family = "normal", mu = 0.0, sigma = 1.0 }
//!
//! [path]
//! kind = "diagonal"              # or phi_kappa:2, fixed_ratio:4, iterated_fix_n2:20, ...
//! sizes = [100, 1000, 10000]
//!
//! [pivot]
//! kind = "W"                     # W | WHat | U | T
//! target = "auto"                # auto | phi | a variance theta >= 0
//!
//! [run]
//! replications = 20000
//! seed = 42
//! levels = [0.95]
//! coverage = true
//! experiment_id = "corr-diag"
//! ```
//!
//! Unknown keys anywhere are errors.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harness::{ExperimentConfig, PivotKind, TargetSpec};
use crate::paths::{IndexPath, PathKind};
use crate::samplers::{DependenceKind, Marginal, PairedSampleModel, RhoRule, Seed};
use crate::ExecutionPlan;

/// A configuration problem tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.to_string(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "invalid `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub model: ModelSection,
    pub path: PathSection,
    #[serde(default)]
    pub pivot: PivotSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_model_kind")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_rule: Option<String>,
    #[serde(default = "Marginal::standard_normal")]
    pub marginal1: Marginal,
    #[serde(default = "Marginal::standard_normal")]
    pub marginal2: Marginal,
}

fn default_model_kind() -> String {
    "independent".into()
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: default_model_kind(),
            rho: None,
            rho_rule: None,
            marginal1: Marginal::standard_normal(),
            marginal2: Marginal::standard_normal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    pub kind: String,
    pub sizes: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetField {
    Name(String),
    Theta(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PivotSection {
    #[serde(default = "default_pivot")]
    pub kind: String,
    #[serde(default = "default_target")]
    pub target: TargetField,
}

fn default_pivot() -> String {
    "W".into()
}

fn default_target() -> TargetField {
    TargetField::Name("auto".into())
}

impl Default for PivotSection {
    fn default() -> Self {
        PivotSection {
            kind: default_pivot(),
            target: default_target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_reps")]
    pub replications: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub coverage: bool,
    #[serde(default)]
    pub experiment_id: String,
}

fn default_reps() -> u64 {
    1000
}

fn default_levels() -> Vec<f64> {
    vec![0.95]
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            replications: default_reps(),
            seed: None,
            levels: default_levels(),
            coverage: false,
            experiment_id: String::new(),
        }
    }
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub experiment: ExperimentConfig,
    pub coverage: bool,
    pub experiment_id: String,
    /// The file as parsed, with overrides applied.
    pub file: ConfigFile,
}

pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|e| {
        // toml reports the offending key in its message; keep it whole
        ConfigError::at("", format!("config parse error: {}", e.to_string().trim_end()))
    })
}

fn model_from(section: &ModelSection) -> Result<PairedSampleModel, ConfigError> {
    let rho = || section.rho.ok_or_else(|| ConfigError::at("model.rho", "required for this model kind"));
    let kind = match section.kind.as_str() {
        "independent" => DependenceKind::IndependentMarginals,
        "gaussian_correlated" => DependenceKind::GaussianCorrelated { rho: rho()? },
        "sign_flip" => DependenceKind::SignFlipDependent,
        "time_varying" => {
            let amp = rho()?;
            let rule = match section.rho_rule.as_deref() {
                Some("constant") => RhoRule::Constant(amp),
                Some("alternating") => RhoRule::Alternating(amp),
                Some("decaying") => RhoRule::Decaying(amp),
                Some(other) => {
                    return Err(ConfigError::at(
                        "model.rho_rule",
                        format!("unknown rule {other:?}; expected constant, alternating or decaying"),
                    ))
                }
                None => return Err(ConfigError::at("model.rho_rule", "required for time_varying")),
            };
            DependenceKind::TimeVaryingGaussian { rule }
        }
        other => {
            return Err(ConfigError::at(
                "model.kind",
                format!("unknown model {other:?}; expected independent, gaussian_correlated, sign_flip or time_varying"),
            ))
        }
    };
    if matches!(kind, DependenceKind::IndependentMarginals | DependenceKind::SignFlipDependent) && section.rho.is_some() {
        return Err(ConfigError::at("model.rho", format!("not used by model {}", section.kind)));
    }
    if !matches!(kind, DependenceKind::TimeVaryingGaussian { .. }) && section.rho_rule.is_some() {
        return Err(ConfigError::at("model.rho_rule", "only used by time_varying"));
    }
    if let Some(rho) = section.rho {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(ConfigError::at("model.rho", format!("rho = {rho} must satisfy |rho| <= 1")));
        }
    }
    for (key, m) in [("model.marginal1", &section.marginal1), ("model.marginal2", &section.marginal2)] {
        m.validate(key).map_err(|e| ConfigError::at(key, e))?;
    }
    PairedSampleModel::new(kind, section.marginal1, section.marginal2).map_err(|e| ConfigError::at("model.kind", e))
}

/// Validates a parsed file into a runnable experiment. No sampling happens
/// here.
pub fn resolve(file: ConfigFile, seed: Seed, plan: ExecutionPlan) -> Result<ResolvedRun, ConfigError> {
    let model = model_from(&file.model)?;

    let kind: PathKind = file.path.kind.parse().map_err(|e| ConfigError::at("path.kind", e))?;
    if file.path.sizes.is_empty() {
        return Err(ConfigError::at("path.sizes", "must list at least one size"));
    }
    let path: IndexPath = kind.build(&file.path.sizes).map_err(|e| ConfigError::at("path.sizes", e))?;

    let pivot: PivotKind = file.pivot.kind.parse().map_err(|e| ConfigError::at("pivot.kind", e))?;
    let target = match &file.pivot.target {
        TargetField::Name(n) if n == "auto" => TargetSpec::AutoFromPath,
        TargetField::Name(n) if n == "phi" => TargetSpec::Phi,
        TargetField::Name(n) => {
            return Err(ConfigError::at(
                "pivot.target",
                format!("unknown target {n:?}; expected auto, phi or a variance"),
            ))
        }
        TargetField::Theta(t) if t.is_finite() && *t >= 0.0 => TargetSpec::NormalTheta(*t),
        TargetField::Theta(t) => return Err(ConfigError::at("pivot.target", format!("variance {t} must be >= 0"))),
    };

    let run = &file.run;
    if run.replications == 0 {
        return Err(ConfigError::at("run.replications", "must be at least 1"));
    }
    if let Some(l) = run.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(ConfigError::at("run.levels", format!("level {l} is outside (0, 1)")));
    }
    if run.coverage && pivot != PivotKind::W {
        return Err(ConfigError::at("run.coverage", "coverage runs use pivot W"));
    }

    let experiment = ExperimentConfig {
        model,
        path,
        pivot,
        replications: run.replications,
        seed,
        levels: run.levels.clone(),
        target,
        plan,
    };
    experiment.validate().map_err(|e| ConfigError::at("", e))?;
    Ok(ResolvedRun {
        coverage: run.coverage,
        experiment_id: run.experiment_id.clone(),
        experiment,
        file,
    })
}
