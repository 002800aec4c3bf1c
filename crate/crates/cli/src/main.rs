//! Experiment runner. Exit codes: 0 success, 1 configuration error,
//! 2 numerical failure, 3 acceptance failure.

use clap::{Parser, Subcommand};
use mfc_cli::acceptance;
use mfc_cli::config::{self, RawConfig};
use mfc_cli::output::{fmt_f64, OutputWriter};
use mfc_cli::runners::{self, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mfc",
    about = "Solvers and learners for control problems whose state is a probability distribution",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact dynamic programming on the projected grid MDP.
    Oracle { config: PathBuf },
    /// Tabular Q-learning over grid points and action profiles.
    Mfq { config: PathBuf },
    /// Actor-critic training over distribution states.
    Ddpg { config: PathBuf },
    /// Rollout evaluation of a stored policy.
    Evaluate { config: PathBuf },
    /// Accuracy and episode-budget formulas for a parameter set.
    Bound { config: PathBuf },
    /// Run the acceptance suite and write one CSV row per criterion.
    Acceptance { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<RawConfig, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {path:?}: {e}")))?;
    RawConfig::parse(&source).map_err(Into::into)
}

fn run_acceptance(raw: &RawConfig) -> Result<(), CliError> {
    let run = config::run_section(raw)?;
    let section = config::acceptance_section(raw)?;
    let results = acceptance::run_suite(section.include_slow);
    let writer = OutputWriter::new(&run.out_dir, &raw.source, run.seed, "acceptance")?;
    let rows: Vec<String> = results
        .iter()
        .map(|r| {
            let details: Vec<String> = r
                .checks
                .iter()
                .map(|c| {
                    format!(
                        "{} {} {} {}",
                        c.name,
                        fmt_f64(c.measured),
                        c.comparator,
                        fmt_f64(c.threshold)
                    )
                })
                .collect();
            format!(
                "{},{},{},{},{},{},{}",
                r.id,
                r.name.replace(',', ";"),
                if r.passed() { "PASS" } else { "FAIL" },
                r.provenance,
                if r.slow { "slow" } else { "fast" },
                fmt_f64(r.runtime_s),
                details.join("; ")
            )
        })
        .collect();
    writer.write_csv(
        "acceptance.csv",
        "criterion,name,result,provenance,speed,runtime_s,details",
        &rows,
    )?;
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.summary());
        all_pass &= r.passed();
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::AcceptanceFailed)
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Oracle { config } => {
            for f in runners::run_oracle(&load(config)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Mfq { config } => {
            for f in runners::run_mfq(&load(config)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Ddpg { config } => {
            for f in runners::run_ddpg(&load(config)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Evaluate { config } => {
            for f in runners::run_evaluate(&load(config)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Bound { config } => {
            for f in runners::run_bound(&load(config)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Acceptance { config } => run_acceptance(&load(config)?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    // Dying quietly on a closed pipe (e.g. `mfc bound ... | head`) beats a
    // panic with a backtrace.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(1),
                CliError::Numerical(_) => ExitCode::from(2),
                CliError::AcceptanceFailed => ExitCode::from(3),
            }
        }
    }
}
