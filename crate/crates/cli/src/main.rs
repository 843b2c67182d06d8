mod error;
mod report;
mod scenario;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use condstate::demos::{run_demo, DEMOS};
use condstate::verify::{verify, DEFAULT_SEED, SUITES};
use condstate::Tolerances;

use crate::error::{CliError, CliResult};
use crate::report::{to_json, DemoReport, VerifyReport};
use crate::scenario::TaskKind;

/// Quantum conditional states: scenario runner, verification suites and
/// worked demos. Reports are JSON on standard output.
#[derive(Debug, Parser)]
#[command(name = "condstate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the task declared in a scenario file.
    Run {
        file: PathBuf,
        /// Seed for `random` payloads.
        #[arg(long, env = "CONDSTATE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Overrides the equality tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the randomized property suites.
    Verify {
        /// Run only this suite.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, env = "CONDSTATE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Instances per suite (each suite has its own default).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run a named worked example.
    Demo { name: String },
    /// Build and check every object of a scenario without running its task.
    Validate {
        file: PathBuf,
        #[arg(long, env = "CONDSTATE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn finish(json: String, passed: bool) -> ExitCode {
    print!("{json}");
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn execute(cmd: Command) -> CliResult<ExitCode> {
    match cmd {
        Command::Run { file, seed, tol } => {
            let loaded = scenario::load(&read(&file)?, seed, tol)?;
            let r = tasks::run(&loaded, "run", loaded.task)?;
            Ok(finish(to_json(&r), r.passed))
        }
        Command::Validate { file, seed } => {
            let loaded = scenario::load(&read(&file)?, seed, None)?;
            let r = tasks::run(&loaded, "validate", TaskKind::Validate)?;
            Ok(finish(to_json(&r), r.passed))
        }
        Command::Verify { suite, seed, count } => {
            if let Some(s) = &suite {
                if !SUITES.contains(&s.as_str()) {
                    return Err(CliError::Unknown {
                        what: "suite",
                        name: s.clone(),
                        available: SUITES.join(", "),
                    });
                }
            }
            let reports = verify(suite.as_deref(), seed, count, &Tolerances::default())?;
            let r = VerifyReport::new(seed, &reports);
            Ok(finish(to_json(&r), r.passed))
        }
        Command::Demo { name } => {
            if !DEMOS.contains(&name.as_str()) {
                return Err(CliError::Unknown {
                    what: "demo",
                    name,
                    available: DEMOS.join(", "),
                });
            }
            let d = run_demo(&name, &Tolerances::default())?;
            let r = DemoReport::from(&d);
            Ok(finish(to_json(&r), r.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
