use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod format;

#[derive(Debug, Parser)]
#[command(
    name = "cps-reliab",
    version,
    about = "Reliability evaluation for cyber-physical systems"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text, env = "CPS_RELIAB_FORMAT")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an architecture document analytically.
    Eval {
        model: PathBuf,
        /// Mission length in hours (defaults to the document's `mission_hours`).
        #[arg(long, env = "CPS_RELIAB_MISSION")]
        mission: Option<f64>,
        /// Also tabulate R(t) over `t0:t1:steps`.
        #[arg(long, env = "CPS_RELIAB_CURVE")]
        curve: Option<String>,
        /// Permit a literal-sum computation-and-control value in the system product.
        #[arg(long, env = "CPS_RELIAB_ALLOW_LITERAL_SUM")]
        allow_literal_sum: bool,
    },
    /// Estimate system reliability by Monte Carlo and compare with the analytical value.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 100_000, env = "CPS_RELIAB_SAMPLES")]
        samples: u64,
        #[arg(long, default_value_t = 42, env = "CPS_RELIAB_SEED")]
        seed: u64,
        #[arg(long, env = "CPS_RELIAB_MISSION")]
        mission: Option<f64>,
        /// Worker threads; results do not depend on it.
        #[arg(long, env = "CPS_RELIAB_THREADS")]
        threads: Option<usize>,
    },
    /// Pick the most reliable catalog entry per module and assemble a redundant system.
    Select {
        catalog: PathBuf,
        #[arg(long, env = "CPS_RELIAB_MISSION")]
        mission: f64,
        /// Per-module layout, e.g. `sensors=5x2,actuators=3x2,network=2,cc=2`.
        #[arg(long, env = "CPS_RELIAB_REDUNDANCY")]
        redundancy: Option<String>,
        /// Write the assembled architecture document here.
        #[arg(long, env = "CPS_RELIAB_EMIT_MODEL")]
        emit_model: Option<PathBuf>,
    },
    /// Score a record batch against a schema and combine the data reliability.
    DataScore {
        schema: PathBuf,
        records: PathBuf,
        /// product, literal_sum or normalized_mean.
        #[arg(long, default_value = "normalized_mean", env = "CPS_RELIAB_COMBINE")]
        combine: String,
        /// Comma-separated weights for normalized_mean, in completeness,
        /// accuracy, consistency, timeliness order.
        #[arg(long, env = "CPS_RELIAB_WEIGHTS")]
        weights: Option<String>,
    },
}

/// A failed command: message plus exit status (1 for I/O, 2 for validation).
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<cps_reliab_core::Error> for Failure {
    fn from(e: cps_reliab_core::Error) -> Self {
        Failure {
            code: if e.is_io() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = cli.format;
    let result = match cli.command {
        Command::Eval {
            model,
            mission,
            curve,
            allow_literal_sum,
        } => commands::eval(&model, mission, curve.as_deref(), allow_literal_sum, fmt),
        Command::Simulate {
            model,
            samples,
            seed,
            mission,
            threads,
        } => commands::simulate(&model, samples, seed, mission, threads, fmt),
        Command::Select {
            catalog,
            mission,
            redundancy,
            emit_model,
        } => commands::select(
            &catalog,
            mission,
            redundancy.as_deref(),
            emit_model.as_deref(),
            fmt,
        ),
        Command::DataScore {
            schema,
            records,
            combine,
            weights,
        } => commands::data_score(&schema, &records, &combine, weights.as_deref(), fmt),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
