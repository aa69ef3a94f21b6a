use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use shiftwave::{compare, output, study, ExperimentConfig};

/// Large-time experiments for scalar conservation laws with periodically
/// perturbed Riemann data.
#[derive(Debug, Parser)]
#[command(name = "shiftwave", version)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "SHIFTWAVE_OUT", default_value = "shiftwave-out")]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Not supported: every run is deterministic.
    #[arg(long, global = true, hide = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the studies listed in the config.
    Run { config: PathBuf },
    /// Compare the variational solution with the Godunov scheme.
    Compare { config: PathBuf },
    /// Parse and check a config; prints it with defaults filled in.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<shiftwave::Experiment> {
    ExperimentConfig::load(path)?
        .build()
        .with_context(|| format!("validating {}", path.display()))
}

fn real_main(cli: Cli) -> anyhow::Result<bool> {
    if cli.seed.is_some() {
        bail!("--seed is not accepted: runs involve no randomness");
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let (name, exp, outcomes) = match &cli.command {
        Command::Validate { config } => {
            let e = load(config)?;
            println!("{}", serde_json::to_string_pretty(&e.config)?);
            return Ok(true);
        }
        Command::Run { config } => {
            let e = load(config)?;
            if e.config.study.kinds.is_empty() {
                bail!("[study] kinds is empty: nothing to run");
            }
            let o = study::run_all(&e)?;
            ("run", e, o)
        }
        Command::Compare { config } => {
            let e = load(config)?;
            let o = vec![compare::compare(&e)?];
            ("compare", e, o)
        }
    };
    let summary = output::summary(name, &exp, &outcomes);
    output::write_all(&cli.out, &outcomes, &summary)?;
    for o in &outcomes {
        for c in &o.checks {
            let status = if c.pass { "pass" } else { "FAIL" };
            println!("{status} {}::{} = {:.6e} ({})", o.name, c.name, c.value, c.limit);
        }
    }
    let pass = output::overall_pass(&exp, &outcomes);
    println!("{} -> {}", if pass { "PASS" } else { "FAIL" }, cli.out.display());
    Ok(pass)
}
