//! Library side of the `degenkit` command: config loading, the probe
//! registry and report writing.

pub mod config;
pub mod registry;

use std::fs;
use std::path::{Path, PathBuf};

use degenkit_core::ProbeReport;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::RunConfig;
pub use registry::{lookup, ProbeInfo, PROBES};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, kernel text or probe parameters.
    #[error("config error: {0}")]
    Config(String),
    /// A probe failed while evaluating.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub refinements: Option<usize>,
}

/// What `run` writes: the probe report plus the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub report: ProbeReport,
    pub config: RunConfig,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text, &path.display().to_string())
}

/// Applies overrides, runs the configured probe and returns the report with
/// the effective config (probe defaults filled in) and its digest.
pub fn execute(mut config: RunConfig, overrides: &Overrides) -> Result<RunReport, CliError> {
    if let Some(s) = overrides.seed {
        config.seed = s;
    }
    if let Some(n) = overrides.grid_n {
        config.grid.n = n;
    }
    if let Some(r) = overrides.refinements {
        config.grid.refinements = r;
    }
    if let Some(p) = &overrides.out {
        config.output.report = Some(p.clone());
    }
    if let Some(p) = &overrides.csv {
        config.output.csv = Some(p.clone());
    }
    let info = lookup(&config.probe.name)?;
    let setup = config.build_setup()?;
    let (mut report, used) = info.run(&config.probe.params, &setup, config.seed)?;
    config.probe.params = used;
    report.digest = Some(config.digest());
    Ok(RunReport { report, config })
}

/// Writes the report JSON and CSV to the paths named in the effective config.
pub fn write_outputs(run: &RunReport) -> Result<(), CliError> {
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    if let Some(p) = &run.config.output.report {
        let mut text = serde_json::to_string_pretty(run).expect("report serializes");
        text.push('\n');
        write(p, text)?;
    }
    if let Some(p) = &run.config.output.csv {
        write(p, run.report.to_csv())?;
    }
    Ok(())
}

/// One line per run: probe, verdict and the named bounds.
pub fn summary(run: &RunReport) -> String {
    let r = &run.report;
    let bounds: Vec<String> = r.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{} {} {}", r.probe, r.verdict, bounds.join(" "))
}

/// Table of registered probes: name, what they test, required parameters.
pub fn list_probes() -> String {
    let width = PROBES.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let anchor_width = PROBES.iter().map(|p| p.anchor.len()).max().unwrap_or(0);
    let mut out = String::new();
    for p in PROBES {
        let required = if p.required.is_empty() {
            "-".to_string()
        } else {
            p.required.join(",")
        };
        out.push_str(&format!("{:width$}  {:anchor_width$}  {required}\n", p.name, p.anchor));
    }
    out
}
