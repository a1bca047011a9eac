use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tunneltime", version, about = "Tunnelling times for 1D quantum and photonic barriers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML configuration file.
    Run { config: PathBuf },
    /// Parse and validate a configuration without running it.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => tunneltime_cli::run_file(&config).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Check { config } => std::fs::read_to_string(&config)
            .map_err(|source| tunneltime_cli::CliError::Io {
                context: format!("reading {}", config.display()),
                source,
            })
            .and_then(|text| Ok(tunneltime_cli::parse_config(&text)?))
            .map(|c| println!("ok: {} scenario", c.kind.name())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
