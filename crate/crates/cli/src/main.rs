use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use duality_cli::{
    run_sweep, verify, write_csv, write_csv_atomic, CliError, ExperimentConfig, Result,
};
use duality_core::tolerance::Tolerances;

#[derive(Parser)]
#[command(
    name = "duality-sim",
    version,
    about = "Duality quantum computing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output path from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and print the report to stdout.
    Simulate { config: PathBuf },
    /// Run a config and write the report CSV.
    Sweep { config: PathBuf },
    /// Run a verification suite; exits nonzero if any check fails.
    Verify { suite: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
}

impl Profile {
    fn tolerances(self) -> Tolerances {
        match self {
            Profile::Strict => Tolerances::STRICT,
            Profile::Default => Tolerances::DEFAULT,
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Simulate { config } => {
            let config = load(cli, config)?;
            let rows = run_sweep(&config);
            match &cli.out {
                Some(path) => write_csv_atomic(&rows, path)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Sweep { config } => {
            let config = load(cli, config)?;
            let rows = run_sweep(&config);
            write_csv_atomic(&rows, &config.output)?;
            let failed = rows.iter().filter(|r| !r.error_code.is_empty()).count();
            eprintln!(
                "wrote {} rows to {} ({failed} failed)",
                rows.len(),
                config.output.display()
            );
            Ok(true)
        }
        Command::Verify { suite } => {
            let checks = verify(
                suite,
                &cli.tolerance_profile.tolerances(),
                cli.seed.unwrap_or(2024),
            )?;
            for check in &checks {
                println!("{check}");
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code: CliError = e;
            ExitCode::from(code.exit_code() as u8)
        }
    }
}
