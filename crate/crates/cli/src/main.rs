use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fieldctl::config::Task;
use fieldctl::{execute, load_config, CliError, RunOptions};

/// Optimal initial field states for cavity-QED atomic state preparation.
#[derive(Parser)]
#[command(name = "fieldctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the control problem and compare with the best coherent state.
    Solve(Common),
    /// Evaluate every point of the `[[sweep]]` grid.
    Sweep(Common),
    /// Wigner function of the optimal state.
    Wigner(Common),
    /// Atomic populations over time for the optimal and coherent fields.
    Evolve(Common),
    /// Run every task listed under `tasks` in the configuration.
    Run(Common),
    /// Check a configuration without computing anything.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory (overrides `output` in the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
    /// Field truncation used for propagation (default 2·n_max).
    #[arg(long)]
    n_trunc: Option<usize>,
    /// Recorded in the manifest; no computation is randomised.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (common, tasks) = match cli.command {
        Command::Validate { config } => {
            let config = load_config(&config)?;
            println!(
                "ok: {}",
                config.preset.as_deref().unwrap_or("custom scenario")
            );
            return Ok(0);
        }
        Command::Solve(c) => (c, vec![Task::Solve, Task::Baseline]),
        Command::Sweep(c) => (c, vec![Task::Sweep]),
        Command::Wigner(c) => (c, vec![Task::Wigner]),
        Command::Evolve(c) => (c, vec![Task::Evolve]),
        Command::Run(c) => (c, Vec::new()),
    };
    let config = load_config(&common.config)?;
    let tasks = if tasks.is_empty() {
        config.tasks.clone()
    } else {
        tasks
    };
    let options = RunOptions {
        out: common.out,
        overwrite: common.overwrite,
        threads: common.threads,
        seed: common.seed,
        n_trunc: common.n_trunc,
    };
    let outcome = execute(&config, &tasks, &options)?;
    for report in &outcome.reports {
        match &report.error {
            None => println!("{}: ok ({})", report.task.name(), report.files.join(", ")),
            Some(e) => eprintln!("{}: failed: {e}", report.task.name()),
        }
    }
    println!("output: {}", outcome.out_dir.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
