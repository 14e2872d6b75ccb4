//! Command-line front end: configuration, command dispatch and report files.

pub mod commands;
pub mod config;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use commands::{CommandOutput, Status, Table};
use config::{ConfigError, MapChoice, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "hamroot", version, about = "Parity obstruction to square roots of a perturbed radial Hamiltonian map")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print derived constants and write a map descriptor.
    Construct,
    /// Enumerate primitive cycles of the selected map.
    Cycles,
    /// Enumerate cycles and issue the parity certificate.
    Obstruct,
    /// Run the verification suite.
    Verify,
    /// Count cycles and measure displacement over a parameter sweep.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Cycles => "cycles",
            Command::Obstruct => "obstruct",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON report path (default `hamroot-<command>.json`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV export of the point list or table.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub map: Option<MapChoice>,
    /// Use the `cos(2kθ)` control perturbation.
    #[arg(long, global = true)]
    pub control: bool,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub integrator_step: Option<f64>,
    /// Sample count override for `verify`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Skip the enumeration-based checks in `verify`.
    #[arg(long, global = true)]
    pub quick: bool,
    /// Suppress the summary line on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

impl Common {
    /// Applies the flags on top of `config`.
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(g) = self.grid {
            config.grid_resolution = g;
        }
        if let Some(o) = self.order {
            config.cycles.order = Some(o);
        }
        if let Some(m) = self.map {
            config.cycles.map = m;
        }
        if self.control {
            config.cycles.control = true;
            config.sweep.control = true;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(d) = self.delta {
            config.delta = d;
        }
        if let Some(e) = self.epsilon {
            config.epsilon = Some(e);
        }
        if let Some(h) = self.integrator_step {
            config.integrator_step = h;
        }
        if let Some(n) = self.samples {
            config.verify.samples = Some(n);
        }
        if self.quick {
            config.verify.quick = true;
        }
    }
}

/// Final outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub message: String,
    pub report: serde_json::Value,
    pub report_path: Option<PathBuf>,
}

/// Defaults, then the file, then the flags.
pub fn resolve_config(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    common.apply(&mut config);
    config.resolve();
    Ok(config)
}

pub fn dispatch(command: Command, config: &RunConfig) -> CommandOutput {
    let params = match config.params() {
        Ok(p) => p,
        Err(e) => {
            return CommandOutput {
                results: json!({ "error": e.to_string() }),
                checks: Vec::new(),
                status: Status::InvalidConfig,
                table: None,
                message: format!("invalid configuration: {e}"),
            }
        }
    };
    match command {
        Command::Construct => commands::construct(config, &params),
        Command::Cycles => commands::cycles(config, &params),
        Command::Obstruct => commands::obstruct(config, &params),
        Command::Verify => commands::verify(config, &params),
        Command::Sweep => commands::sweep(config, &params),
    }
}

/// Runs a parsed command line, writing the report and optional CSV.
pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let config = match resolve_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                status: Status::InvalidConfig,
                message: format!("invalid configuration: {e}"),
                report: json!({ "error": e.to_string() }),
                report_path: None,
            }
        }
    };
    let output = dispatch(cli.command, &config);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": config,
        "results": output.results,
        "checks": output.checks,
        "status": output.status,
        "exit_code": output.status.code(),
        "timing": { "seconds": start.elapsed().as_secs_f64() },
    });
    if output.status == Status::InvalidConfig {
        return Outcome { status: output.status, message: output.message, report, report_path: None };
    }
    let path = cli.common.out.clone().unwrap_or_else(|| PathBuf::from(format!("hamroot-{}.json", cli.command.name())));
    let mut status = output.status;
    let mut message = output.message;
    let text = serde_json::to_string_pretty(&report).expect("reports serialise");
    if let Err(e) = write_atomic(&path, text.as_bytes()) {
        status = Status::NumericalFailure;
        message = format!("{message}; cannot write {}: {e}", path.display());
    }
    if let (Some(csv_path), Some(table)) = (&cli.common.csv, &output.table) {
        if let Err(e) = write_csv(csv_path, table) {
            status = Status::NumericalFailure;
            message = format!("{message}; cannot write {}: {e}", csv_path.display());
        }
    }
    Outcome { status, message, report, report_path: Some(path) }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

pub fn write_csv(path: &Path, table: &Table) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(path, &bytes)
}
