use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degenkit_cli::{execute, list_probes, load_config, summary, write_outputs, CliError, Overrides};

/// Numerical probes for fully nonlinear integral operators.
#[derive(Parser)]
#[command(name = "degenkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run the probe named in a config file (or a previous report).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        refinements: Option<usize>,
        /// Suppress the summary line.
        #[arg(long)]
        quiet: bool,
    },
    /// Print the registered probes.
    ListProbes,
}

/// `DEGENKIT_THREADS` caps the rayon worker count.
fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DEGENKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DEGENKIT_THREADS: expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("DEGENKIT_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Commands::ListProbes => {
            print!("{}", list_probes());
            Ok(())
        }
        Commands::Run {
            config,
            out,
            csv,
            seed,
            grid_n,
            refinements,
            quiet,
        } => {
            init_threads()?;
            let cfg = load_config(&config)?;
            let overrides = Overrides {
                out,
                csv,
                seed,
                grid_n,
                refinements,
            };
            let report = execute(cfg, &overrides)?;
            write_outputs(&report)?;
            if !quiet {
                println!("{}", summary(&report));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("degenkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
