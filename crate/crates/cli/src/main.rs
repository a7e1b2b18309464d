use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsch_da::error::RunError;
use nsch_da::experiments::{self, load_config, preset, RunConfig, Scale};

/// Twin data-assimilation experiments for the phase-field viscoelastic flow model.
#[derive(Parser, Debug)]
#[command(name = "nsch-da", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the config of one of the six shipped tests.
    Preset {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        test: u8,
        #[arg(long, default_value = "desk")]
        scale: Scale,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run with VTK snapshots of phi, xi, v, zeta and pi every `k` steps.
    DumpFields {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        every: u64,
        /// Defaults to the desk-scale droplet test.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => EXIT_CONFIG,
        RunError::Io(_) => EXIT_OTHER,
        _ => EXIT_SOLVER,
    }
}

fn execute(cfg: &RunConfig, out: &Path) -> Result<(), RunError> {
    let mut shown = 0;
    let summary = experiments::run(cfg, out, |n, steps| {
        let pct = 100 * n / steps;
        if pct >= shown + 10 || n == steps {
            shown = pct;
            eprintln!("step {n}/{steps} ({pct}%)");
        }
    })?;
    print!("{}", summary.to_text());
    Ok(())
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => load_config(&config).map_err(RunError::from).and_then(|cfg| {
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            execute(&cfg, &dir)
        }),
        Command::Preset { test, scale, output } => {
            let text = preset(test, scale).expect("test id checked by clap").to_toml();
            match output {
                Some(p) => std::fs::write(p, text).map_err(RunError::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::DumpFields { every, config, out } => {
            let cfg = match config {
                Some(p) => load_config(&p).map_err(RunError::from),
                None => Ok(preset(1, Scale::Desk).expect("shipped preset")),
            };
            cfg.and_then(|mut cfg| {
                cfg.output.vtk_every = every as usize;
                let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
                execute(&cfg, &dir)
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
