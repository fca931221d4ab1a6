mod commands;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use uhqkd::rng::DEFAULT_SEED;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST_FAILED: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

/// Finite-key rates, protocol simulation and self-tests for two-universal
/// hashing QKD.
#[derive(Debug, Parser)]
#[command(name = "uhqkd", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed (decimal or 0x-prefixed hex); printed in every report.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = parse_u64)]
    pub seed: u64,
    /// Output file; `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key size and security of the two-universal hashing protocol.
    #[command(name = "rates-2uh")]
    Rates2uh(Rates2uhArgs),
    /// Optimised key size of the random-sampling protocol and its upper bound.
    #[command(name = "rates-sampling")]
    RatesSampling(SamplingArgs),
    /// Both protocols over a grid of block sizes.
    Compare(CompareArgs),
    /// A batch of protocol runs.
    Simulate(SimulateArgs),
    /// The desk-scale verification suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct Rates2uhArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub epsilon: f64,
    /// floor_r, ceil_r or rate_direct.
    #[arg(long, default_value = "floor_r")]
    pub rounding: String,
    /// Also report the smallest block size giving this many key bits.
    #[arg(long)]
    pub target_bits: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub delta: f64,
    /// Overall security parameter ε_qkd.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub nu_grid: usize,
    #[arg(long, default_value_t = 200)]
    pub n_pe_grid: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub epsilon: f64,
    /// Comma list (`1000,3100`) or `log:START:END:POINTS`.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value = "floor_r")]
    pub rounding: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub r: usize,
    /// none | fixed:alpha=BITS,beta=BITS | iid:P | custom:ALPHA/BETA=P;...
    #[arg(long, default_value = "none")]
    pub eve: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Fast)]
    pub backend: BackendArg,
    #[arg(long, value_enum, default_value_t = DecoderArg::Auto)]
    pub decoder: DecoderArg,
    /// Use this invertible L (rows of 0/1) for every run instead of sampling.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Write one transcript per run into this directory.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Fast,
    Statevector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Auto,
    Exhaustive,
    KnownPattern,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only the named suite; repeatable.
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            });
        }
    };
    ExitCode::from(commands::dispatch(&cli))
}
