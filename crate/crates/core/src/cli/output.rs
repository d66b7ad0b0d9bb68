//! Summary rows and their CSV / JSON encodings.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::harness::{EmpiricalSummary, ExperimentConfig};
use crate::samplers::{DependenceKind, RhoRule};

/// Column order of the CSV output. Changing it is a format break.
pub const COLUMNS: [&str; 20] = [
    "experiment_id",
    "preset",
    "path_kind",
    "n1",
    "n2",
    "e_ratio",
    "kappa_target",
    "pivot",
    "model_kind",
    "rho_or_rule",
    "reps",
    "degenerate_count",
    "ks_to_phi",
    "ks_to_target",
    "target_theta",
    "emp_mean",
    "emp_var",
    "coverage_95",
    "rejection_95",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment_id: String,
    pub preset: String,
    pub path_kind: String,
    pub n1: u64,
    pub n2: u64,
    pub e_ratio: f64,
    pub kappa_target: f64,
    pub pivot: String,
    pub model_kind: String,
    pub rho_or_rule: String,
    pub reps: u64,
    pub degenerate_count: u64,
    pub ks_to_phi: f64,
    pub ks_to_target: f64,
    pub target_theta: f64,
    pub emp_mean: f64,
    pub emp_var: f64,
    pub coverage_95: Option<f64>,
    pub rejection_95: Option<f64>,
    pub seed: u64,
}

fn rho_or_rule(kind: DependenceKind) -> String {
    match kind {
        DependenceKind::IndependentMarginals | DependenceKind::SignFlipDependent => String::new(),
        DependenceKind::GaussianCorrelated { rho } => rho.to_string(),
        DependenceKind::TimeVaryingGaussian { rule } => match rule {
            RhoRule::Constant(r) => format!("constant:{r}"),
            RhoRule::Alternating(r) => format!("alternating:{r}"),
            RhoRule::Decaying(r) => format!("decaying:{r}"),
        },
    }
}

impl Row {
    pub fn new(experiment_id: &str, preset: &str, config: &ExperimentConfig, s: &EmpiricalSummary) -> Self {
        Row {
            experiment_id: experiment_id.to_string(),
            preset: preset.to_string(),
            path_kind: config.path.kind().to_string(),
            n1: s.point.n1,
            n2: s.point.n2,
            e_ratio: s.point.ratio(),
            kappa_target: config.path.kappa_target().value(),
            pivot: config.pivot.to_string(),
            model_kind: config.model.kind().name().to_string(),
            rho_or_rule: rho_or_rule(config.model.kind()),
            reps: s.replications,
            degenerate_count: s.degenerate_count,
            ks_to_phi: s.ks_to_phi,
            ks_to_target: s.ks_to_target,
            target_theta: s.target_theta,
            emp_mean: s.emp_mean,
            emp_var: s.emp_var,
            coverage_95: s.coverage_at(0.95),
            rejection_95: s.rejection_at(0.95),
            seed: config.seed.0,
        }
    }

    fn csv_fields(&self) -> [String; 20] {
        let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
        [
            self.experiment_id.clone(),
            self.preset.clone(),
            self.path_kind.clone(),
            self.n1.to_string(),
            self.n2.to_string(),
            float(self.e_ratio),
            float(self.kappa_target),
            self.pivot.clone(),
            self.model_kind.clone(),
            self.rho_or_rule.clone(),
            self.reps.to_string(),
            self.degenerate_count.to_string(),
            float(self.ks_to_phi),
            float(self.ks_to_target),
            float(self.target_theta),
            float(self.emp_mean),
            float(self.emp_var),
            opt(self.coverage_95),
            opt(self.rejection_95),
            self.seed.to_string(),
        ]
    }
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS)?;
            for r in rows {
                w.write_record(r.csv_fields())?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)
        }
    }
}

/// Sidecar describing how an output file was produced. Kept apart from the
/// data so reruns compare byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub preset: Option<String>,
    pub config: serde_json::Value,
    pub output_path: String,
    pub format: &'static str,
    pub tool_version: &'static str,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(config_path: Option<&Path>, preset: Option<&str>, config: serde_json::Value, output: &Path, format: Format) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            config_path: config_path.map(|p| p.display().to_string()),
            preset: preset.map(str::to_string),
            config,
            output_path: output.display().to_string(),
            format: format.name(),
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp,
        }
    }
}

pub fn manifest_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}

/// Writes the rows and, next to them, the manifest.
pub fn write_output(output: &Path, rows: &[Row], format: Format, manifest: &RunManifest) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, format)?;
    std::fs::write(output, buf)?;
    let m = serde_json::to_vec_pretty(manifest)?;
    std::fs::write(manifest_path(output), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> Row {
        Row {
            experiment_id: "x".into(),
            preset: String::new(),
            path_kind: "phi_kappa:2".into(),
            n1: 9,
            n2: 4,
            e_ratio: 2.25,
            kappa_target: f64::INFINITY,
            pivot: "W".into(),
            model_kind: "independent".into(),
            rho_or_rule: String::new(),
            reps: 10,
            degenerate_count: 0,
            ks_to_phi: 0.1 + 0.2,
            ks_to_target: 1.0 / 3.0,
            target_theta: 1.0,
            emp_mean: -1e-300,
            emp_var: 5e-324,
            coverage_95: Some(0.95),
            rejection_95: None,
            seed: 7,
        }
    }

    #[test]
    fn csv_round_trips_exactly() {
        let row = sample_row();
        let mut buf = Vec::new();
        write_rows(&mut buf, std::slice::from_ref(&row), Format::Csv).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), COLUMNS);
        let rec = rdr.records().next().unwrap().unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        assert_eq!(f(5), row.e_ratio);
        assert_eq!(f(6), f64::INFINITY);
        assert_eq!(f(12), row.ks_to_phi);
        assert_eq!(f(13), row.ks_to_target);
        assert_eq!(f(15), row.emp_mean);
        assert_eq!(f(16), row.emp_var);
        assert_eq!(f(17), 0.95);
        assert_eq!(&rec[18], "");
        assert_eq!(&rec[2], "phi_kappa:2");
    }

    #[test]
    fn json_mirrors_columns() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[sample_row()], Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let obj = v[0].as_object().unwrap();
        assert_eq!(obj.len(), COLUMNS.len());
        for c in COLUMNS {
            assert!(obj.contains_key(c), "{c}");
        }
        assert_eq!(obj["ks_to_phi"].as_f64(), Some(0.1 + 0.2));
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/run.csv")), Path::new("out/run.csv.manifest.json"));
    }
}
