//! `gentle-press`: run experiments and compress or decompress symbol streams.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 invalid configuration
//! or input, 3 failure threshold exceeded (the report is still written).

use clap::{Parser, Subcommand};
use gentle_press_core::codec::{
    decode, default_delta, encode, quantize_estimate, regularize, EncodedBlob, DEFAULT_PRECISION,
};
use gentle_press_core::harness::{emit_report, run_sweep_with, ExperimentConfig, ReportFormat};
use gentle_press_core::qmath::BlochJson;
use gentle_press_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gentle-press", version, about = "Gentle tomography and adaptive compression of qudit sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        /// Worker threads; output does not depend on this.
        #[arg(long)]
        parallel: Option<usize>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compress whitespace-separated symbol indices against a state estimate.
    Compress {
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON `{"d": .., "bloch": [..]}` holding the estimate.
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompress a blob to one symbol index per line.
    Decompress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Internal(String),
    Threshold(f64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Internal(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn utf8(bytes: Vec<u8>, path: &Path) -> Result<String, Failure> {
    String::from_utf8(bytes).map_err(|_| Failure::Invalid(format!("{}: not UTF-8", path.display())))
}

fn experiment(
    config: &Path,
    out: &Path,
    format: ReportFormat,
    parallel: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_json(&utf8(read(config)?, config)?)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let width = parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_sweep_with(&cfg, width)?;
    write(out, &emit_report(&report, format)?)?;
    if report.exceeds_failure_threshold() {
        return Err(Failure::Threshold(report.max_failure_fraction().unwrap_or(f64::NAN)));
    }
    Ok(())
}

fn parse_symbols(text: &str) -> Result<Vec<u32>, Failure> {
    text.split_whitespace()
        .map(|t| t.parse::<u32>().map_err(|_| Failure::Invalid(format!("bad symbol {t:?}"))))
        .collect()
}

fn compress(input: &Path, state: &Path, n: u64, s: f64, out: &Path) -> Result<(), Failure> {
    let symbols = parse_symbols(&utf8(read(input)?, input)?)?;
    if symbols.len() as u64 != n {
        return Err(Failure::Invalid(format!("expected {n} symbols, found {}", symbols.len())));
    }
    if !(s > 0.0 && s < 0.5) {
        return Err(Failure::Invalid(format!("s must lie in (0, 1/2), got {s}")));
    }
    let bloch: BlochJson = serde_json::from_slice(&read(state)?)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", state.display())))?;
    let delta = default_delta(n, s);
    let est = quantize_estimate(&regularize(&bloch.to_state()?, delta)?, delta, DEFAULT_PRECISION)?;
    write(out, &encode(&symbols, &est)?.to_bytes()?)
}

fn decompress(input: &Path, out: &Path) -> Result<(), Failure> {
    let symbols = decode(&EncodedBlob::from_bytes(&read(input)?)?)?;
    let mut text = String::with_capacity(symbols.len() * 2);
    for s in symbols {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    write(out, text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment { config, out, format, parallel, seed } => {
            experiment(&config, &out, format, parallel, seed)
        }
        Command::Compress { input, state, n, s, out } => compress(&input, &state, n, s, &out),
        Command::Decompress { input, out } => decompress(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Threshold(worst)) => {
            eprintln!("failure fraction {worst} exceeds the configured threshold");
            ExitCode::from(3)
        }
    }
}
