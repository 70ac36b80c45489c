use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use fieldplan_cli::runner::{run_scenario, Overrides};
use fieldplan_cli::scenario::{load_scenario, load_scenario_str, LoadedScenario, ScenarioError};
use fieldplan_cli::{output, SHADOWING_SCENARIO};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_SCENARIO: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "fieldplan",
    about = "Coupled dynamic-neural-field simulation driven by scenario files",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write result tables.
    Run {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Output directory for result files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Record full space-time activation matrices (enables heatmaps).
        #[arg(long)]
        record_history: bool,
    },
    /// Load and validate a scenario, then exit.
    Validate {
        /// Scenario file (TOML).
        scenario: PathBuf,
    },
    /// Run a bundled scenario.
    Demo {
        /// Which bundled scenario to run.
        which: DemoKind,
        /// Output directory for result files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the bundled random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the bundled step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Record full space-time activation matrices (enables heatmaps).
        #[arg(long)]
        record_history: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    /// Baseline / 10 shadowing trials / washout with a coupled memory layer.
    Shadowing,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(EXIT_OK)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };

    match cli.command {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(loaded) => {
                println!(
                    "ok: {} field(s), {} memory layer(s), {} edge(s), {} gated, {} trial(s)",
                    loaded.model.fields.len(),
                    loaded.model.memories.len(),
                    loaded.model.edges.len(),
                    loaded.model.gated_fields.len(),
                    loaded.trials.len()
                );
                ExitCode::from(EXIT_OK)
            }
            Err(e) => {
                report_scenario_error(&e);
                ExitCode::from(EXIT_SCENARIO)
            }
        },
        Command::Run {
            scenario,
            out,
            seed,
            dt,
            record_history,
        } => {
            let loaded = match load_scenario(&scenario) {
                Ok(l) => l,
                Err(e) => {
                    report_scenario_error(&e);
                    return ExitCode::from(EXIT_SCENARIO);
                }
            };
            execute(
                &loaded,
                Overrides {
                    seed,
                    dt,
                    record_history,
                },
                &out,
            )
        }
        Command::Demo {
            which,
            out,
            seed,
            dt,
            record_history,
        } => {
            let text = match which {
                DemoKind::Shadowing => SHADOWING_SCENARIO,
            };
            let loaded = match load_scenario_str(text, "<bundled shadowing>") {
                Ok(l) => l,
                Err(e) => {
                    report_scenario_error(&e);
                    return ExitCode::from(EXIT_SCENARIO);
                }
            };
            execute(
                &loaded,
                Overrides {
                    seed,
                    dt,
                    record_history,
                },
                &out,
            )
        }
    }
}

fn execute(loaded: &LoadedScenario, overrides: Overrides, out: &Path) -> ExitCode {
    let (result, bundle) = match run_scenario(loaded, &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cause = std::error::Error::source(&e);
            while let Some(c) = cause {
                eprintln!("  caused by: {c}");
                cause = c.source();
            }
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    match output::write_results(&bundle, out) {
        Ok(files) => {
            println!(
                "wrote {} file(s) to {} ({} trial(s))",
                files.len(),
                out.display(),
                result.trials.len()
            );
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SCENARIO)
        }
    }
}

fn report_scenario_error(e: &ScenarioError) {
    eprintln!("error: {e}");
    let mut cause = std::error::Error::source(e);
    while let Some(c) = cause {
        eprintln!("  caused by: {c}");
        cause = c.source();
    }
}
