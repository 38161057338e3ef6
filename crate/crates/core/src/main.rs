use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swingvi_core::cli::{self, ScenarioSource, SweepGrid};
use swingvi_core::scenario::{builtin_case, CASE_IDS};
use swingvi_core::{Result, Strategy};

#[derive(Parser)]
#[command(name = "swingvi", version, about = "Power swing simulator for grid-forming inverters with virtual-impedance current limiting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in case id (same as --case)
    #[arg(value_name = "CASE", conflicts_with = "case")]
    case_id: Option<String>,
    /// Built-in case id
    #[arg(long)]
    case: Option<String>,
    /// Scenario JSON file
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override the limiter strategy
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Output directory (default: the scenario's `outputs`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the integration step, s
    #[arg(long)]
    dt: Option<f64>,
}

impl Common {
    fn source(&self) -> ScenarioSource {
        ScenarioSource {
            scenario: self.scenario.clone(),
            case: self.case.clone().or_else(|| self.case_id.clone()),
            strategy: self.strategy,
            dt: self.dt,
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Time-domain simulation with relay supervision
    Simulate(Common),
    /// Closed-form apparent-impedance trajectory over a full swing cycle
    Trajectory {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3600)]
        samples: usize,
    },
    /// Quasi-static P-δ curves of all strategies
    Pdelta {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Stability verdicts over a grid of H, D_p and ΔP0
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        dp: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        dp0: Vec<f64>,
    },
    /// Print a built-in case as scenario JSON, or list the ids
    Case { id: Option<String> },
}

fn run(cli: Cli) -> Result<()> {
    let summary = match cli.command {
        Command::Simulate(c) => {
            let s = c.source().resolve()?;
            cli::simulate(&s, &s.outputs)?
        }
        Command::Trajectory { common, samples } => {
            let s = common.source().resolve()?;
            cli::trajectory(&s, samples, &s.outputs)?
        }
        Command::Pdelta { common, samples } => {
            let s = common.source().resolve()?;
            cli::pdelta(&s, samples, &s.outputs)?
        }
        Command::Sweep { common, h, dp, dp0 } => {
            let s = common.source().resolve()?;
            let grid = SweepGrid { h, d_p: dp, delta_p0: dp0 };
            cli::sweep(&s, &grid, &s.outputs)?.0
        }
        Command::Case { id: None } => {
            emit(&CASE_IDS.join("\n"));
            return Ok(());
        }
        Command::Case { id: Some(id) } => {
            emit(&builtin_case(&id)?.to_json()?);
            return Ok(());
        }
    };
    emit(&serde_json::to_string_pretty(&summary)?);
    Ok(())
}

// a closed downstream pipe (`| head`) is not an error
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
