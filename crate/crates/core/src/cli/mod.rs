//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 experiment failure (or a failed verification
//! check), 2 usage or configuration error.

pub mod config;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::harness::{run_coverage_experiment, run_pivot_experiment};
use crate::paths::{phi_kappa_ratio_bound, PathKind};
use crate::samplers::Seed;
use crate::ExecutionPlan;

use output::{Format, Row, RunManifest};
use presets::{PresetOptions, DEFAULT_SEED};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Environment variable consulted for the seed when neither the flag nor
/// the config provides one.
pub const SEED_ENV: &str = "PIVOTLAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "pivotlab", version, about = "Two-sample pivot experiments over index paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// RNG seed; overrides the config file and PIVOTLAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per path point.
    #[arg(long)]
    reps: Option<u64>,
    /// Output file; a `<out>.manifest.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; 1 runs sequentially. Never changes results.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a named verification preset and report PASS/FAIL per check.
    Verify {
        preset: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Print the points of an index path.
    Paths {
        /// diagonal, phi_zero, phi_infinity, loglog, phi_kappa, fixed_ratio,
        /// iterated_fix_n1, iterated_fix_n2
        kind: String,
        /// `[param] count`
        #[arg(num_args = 1..=2, required = true)]
        args: Vec<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAILURE,
        message: message.into(),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate { config, flags } => simulate(&config, &flags),
        Command::Verify { preset, flags } => verify(&preset, &flags),
        Command::Paths { kind, args } => paths(&kind, &args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn plan(flags: &RunFlags) -> Result<ExecutionPlan, Failure> {
    match flags.workers {
        Some(0) => Err(usage("--workers must be at least 1")),
        w => Ok(ExecutionPlan::from_workers(w)),
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn emit(rows: &[Row], flags: &RunFlags, manifest: impl FnOnce(&Path) -> RunManifest) -> Result<(), Failure> {
    match &flags.out {
        Some(path) => output::write_output(path, rows, flags.format, &manifest(path))
            .map_err(|e| runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            output::write_rows(stdout.lock(), rows, flags.format).map_err(|e| runtime(format!("stdout: {e}")))
        }
    }
}

fn simulate(config_path: &Path, flags: &RunFlags) -> Result<u8, Failure> {
    let mut file = config::load(config_path).map_err(|e| usage(e.to_string()))?;
    let plan = plan(flags)?;
    let seed = match (flags.seed, file.run.seed) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(DEFAULT_SEED),
    };
    file.run.seed = Some(seed);
    if let Some(r) = flags.reps {
        file.run.replications = r;
    }
    let run = config::resolve(file, Seed(seed), plan).map_err(|e| usage(e.to_string()))?;
    let exp = &run.experiment;
    let summaries = if run.coverage {
        run_coverage_experiment(exp)
    } else {
        run_pivot_experiment(exp)
    }
    .map_err(|e| runtime(e.to_string()))?;
    if summaries.iter().any(|s| s.target_fallback) {
        eprintln!(
            "warning: no target law is tabulated for pivot {} under {} on {}; scoring against N(1)",
            exp.pivot,
            exp.model.kind().name(),
            exp.path.kind()
        );
    }
    let rows: Vec<Row> = summaries.iter().map(|s| Row::new(&run.experiment_id, "", exp, s)).collect();
    let resolved = serde_json::to_value(&run.file).map_err(|e| runtime(e.to_string()))?;
    emit(&rows, flags, |out| {
        RunManifest::new(Some(config_path), None, resolved, out, flags.format)
    })?;
    Ok(EXIT_OK)
}

fn verify(preset: &str, flags: &RunFlags) -> Result<u8, Failure> {
    if !presets::PRESET_NAMES.contains(&preset) {
        return Err(usage(format!(
            "unknown preset {preset:?}; valid presets: {}",
            presets::PRESET_NAMES.join(", ")
        )));
    }
    if flags.reps == Some(0) {
        return Err(usage("--reps must be at least 1"));
    }
    let plan = plan(flags)?;
    let seed = match flags.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(DEFAULT_SEED),
    };
    let opts = PresetOptions {
        seed: Seed(seed),
        reps: flags.reps,
        plan,
    };
    let report = presets::run_preset(preset, opts).map_err(|e| runtime(e.to_string()))?;
    {
        let mut out = std::io::stdout().lock();
        for c in &report.checks {
            let _ = writeln!(out, "{}", c.line());
        }
    }
    if flags.out.is_some() {
        let resolved = serde_json::json!({ "preset": preset, "seed": seed, "reps": flags.reps });
        emit(&report.rows, flags, |out| {
            RunManifest::new(None, Some(preset), resolved, out, flags.format)
        })?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

/// Kinds whose name takes a parameter on the command line.
const PARAMETRIZED: [&str; 4] = ["phi_kappa", "fixed_ratio", "iterated_fix_n1", "iterated_fix_n2"];

fn paths(kind: &str, args: &[String]) -> Result<u8, Failure> {
    let (spec, count) = match args {
        [count] => (kind.to_string(), count),
        [param, count] if PARAMETRIZED.contains(&kind) => (format!("{kind}:{param}"), count),
        _ => return Err(usage(format!("usage: paths <kind> [param] <count>; {kind} takes no parameter"))),
    };
    let kind: PathKind = spec.parse().map_err(|e: crate::Error| usage(e.to_string()))?;
    let count: u64 = count
        .parse()
        .map_err(|_| usage(format!("count must be a nonnegative integer, got {count:?}")))?;

    let kappa = kind.kappa_target().value();
    let first = match kind {
        PathKind::LogLogDesign => 16,
        _ => 1,
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "r\tn1\tn2\te\tgap\tbound");
    let mut emitted = 0;
    let mut r = first;
    // fixed ratios below 1/2 round small n2 to n1 = 0; skip those
    while emitted < count && r < first + count + 1_000_000 {
        if let Ok(p) = kind.build(&[r]) {
            let pt = p.last();
            let e = pt.ratio();
            let gap = if kappa.is_finite() {
                format!("{}", (e - kappa).abs())
            } else {
                "-".into()
            };
            let bound = match kind {
                PathKind::PhiKappa(k) if r as f64 >= (1.0 / k).ceil() => format!("{}", phi_kappa_ratio_bound(r)),
                _ => "-".into(),
            };
            let _ = writeln!(out, "{r}\t{}\t{}\t{e}\t{gap}\t{bound}", pt.n1, pt.n2);
            emitted += 1;
        }
        r += 1;
    }
    Ok(EXIT_OK)
}
