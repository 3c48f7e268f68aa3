//! Command-line front end: `verify`, `design`, `simulate`, `rank-demo`.
//!
//! Exit codes are a stable contract: 0 success, 1 a check failed, 2 usage or
//! schema error, 3 infeasible design.

mod commands;
pub mod scenario;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use scenario::{DesignRecord, Scenario, SchemaError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "shiftproj",
    version,
    about = "Verify, design and simulate graph shifts whose polynomial filters are subspace projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Re-check the counterexamples and the rank bound.
    Verify(VerifyArgs),
    /// Find a topology-respecting shift for a scenario file.
    Design(DesignArgs),
    /// Run the designed filter as a message-passing network.
    Simulate(SimulateArgs),
    /// Tabulate power-basis ranks against the Cayley-Hamilton bound.
    RankDemo(RankDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// Seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Numerical tolerance (meaning depends on the command).
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the generation time out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Seeded frames per construction and random draws per rank test.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Input signal, comma separated; drawn from --seed when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    signal: Option<Vec<f64>>,
    /// Use a design written by `design` instead of computing one.
    #[arg(long)]
    design: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct RankDemoArgs {
    /// Dimension or inclusive range such as `3-8`.
    #[arg(long, default_value = "3-8", value_parser = parse_range)]
    n: RangeInclusive<usize>,
    /// Highest power; defaults to 2n.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    common: CommonArgs,
}

const MAX_DEMO_N: usize = 64;

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{t}` is not a non-negative integer"))
    };
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi || hi > MAX_DEMO_N {
        return Err(format!("need 1 <= lo <= hi <= {MAX_DEMO_N}, got {lo}-{hi}"));
    }
    Ok(lo..=hi)
}

/// A failure that ends the command with a given exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        Self::usage(format!("schema error at {e}"))
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        let code = match e {
            Infeasible(_) => EXIT_INFEASIBLE,
            NoConvergence(_) | NumericOverflow { .. } => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Human-readable rendering of a report body.
trait Text {
    fn text(&self) -> String;
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

fn render<T: Serialize + Text>(
    common: &CommonArgs,
    command: &str,
    body: &T,
) -> Result<String, CliError> {
    let stamp = (!common.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    let mut out = match common.format {
        Format::Json => {
            let env = Envelope {
                command,
                body,
                generated_at_unix: stamp,
            };
            serde_json::to_string_pretty(&env).map_err(|e| CliError {
                code: EXIT_CHECK_FAILED,
                message: e.to_string(),
            })?
        }
        Format::Text => {
            let mut s = body.text();
            if let Some(t) = stamp {
                let _ = writeln!(s, "generated at unix time {t}");
            }
            s
        }
    };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    match &common.out {
        Some(path) => {
            std::fs::write(path, &out)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(format!("wrote {} report to {}\n", command, path.display()))
        }
        None => Ok(out),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code and everything the command would print.
pub fn run_from_args<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            return (code, e.render().to_string());
        }
    };
    let result = match cli.command {
        Command::Verify(a) => commands::verify(&a),
        Command::Design(a) => commands::design(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::RankDemo(a) => commands::rank_demo(&a),
    };
    match result {
        Ok(done) => done,
        Err(e) => (e.code, format!("error: {}\n", e.message)),
    }
}
