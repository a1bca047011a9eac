//! Driver behind the `tunneltime` binary: reads a TOML run configuration,
//! executes the scenario and writes deterministic CSV or JSON tables.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

pub use config::{parse_config, ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] tunneltime::TunnelError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Reads, validates and runs the configuration at `path`. A relative
/// `output.path` is resolved against the configuration's directory.
pub fn run_file(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io(format!("reading {}", path.display())))?;
    let mut config = parse_config(&text)?;
    if config.output.path.is_relative() {
        if let Some(dir) = path.parent() {
            config.output.path = dir.join(&config.output.path);
        }
    }
    run(&config)
}

/// Runs a validated configuration and writes its data files plus the
/// `.meta.json` sidecar. Returns the data files written.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    log::info!("running scenario {}", config.kind.name());
    let artifacts = run::execute(config)?;
    let out = &config.output;
    let written = output::emit(&artifacts, out.format, &out.path, out.precision)
        .map_err(io(format!("writing {}", out.path.display())))?;

    let mut columns = Map::new();
    for t in std::iter::once(&artifacts.main).chain(&artifacts.companions) {
        columns.insert(t.name.clone(), json!(t.columns));
    }
    let c = &config.constants;
    let meta = json!({
        "schema_version": output::SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": config.kind.name(),
        "units": config.units,
        "constants": { "hbar": c.hbar, "mass": c.mass, "light_speed": c.light_speed },
        "format": out.format,
        "precision": out.precision,
        "columns": Value::Object(columns),
        "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    let sidecar = output::sidecar_path(&out.path);
    output::write_atomic(&sidecar, &output::json_bytes(&meta).map_err(io("serialising metadata"))?)
        .map_err(io(format!("writing {}", sidecar.display())))?;
    Ok(written)
}
