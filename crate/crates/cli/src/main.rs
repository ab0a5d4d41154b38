mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uplink_sic_core::sim::AllocationMode;
use uplink_sic_core::Scheme;

/// Uplink rates, bounds, backhaul allocation and cellular simulation for
/// multicell processing with finite backhaul.
#[derive(Debug, Parser)]
#[command(name = "uplink-sic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate of one user versus its backhaul capacity.
    RkCurve(RkCurveArgs),
    /// Two-user symmetric rate regions of all schemes.
    Region(RegionArgs),
    /// Constant-gap certificates on random Wyner instances.
    WynerGap(WynerGapArgs),
    /// Joint-decoding region of a network instance.
    Nnc(NncArgs),
    /// Optimal split of a total backhaul budget.
    Allocate(AllocateArgs),
    /// Run the OFDMA campaign at one backhaul setting.
    Simulate(SimArgs),
    /// Run the OFDMA campaign over a list of backhaul settings.
    SweepBackhaul(SimArgs),
    /// Run every property suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Baseline,
    Wz,
    Nowz,
    Joint,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Baseline => Scheme::Baseline,
            SchemeArg::Wz => Scheme::PerBsWz,
            SchemeArg::Nowz => Scheme::PerBsNoWz,
            SchemeArg::Joint => Scheme::JointBs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AllocArg {
    Uniform,
    Optimized,
}

impl From<AllocArg> for AllocationMode {
    fn from(a: AllocArg) -> Self {
        match a {
            AllocArg::Uniform => AllocationMode::Uniform,
            AllocArg::Optimized => AllocationMode::Optimized,
        }
    }
}

#[derive(Debug, Args)]
struct OutArg {
    /// Directory for output files; stdout when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct RkCurveArgs {
    /// Effective SINR in dB.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    sinr_db: f64,
    /// Largest backhaul capacity, bits.
    #[arg(long, default_value_t = 8.0)]
    c_max: f64,
    /// Capacity step, bits.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    inr_db: f64,
    /// Backhaul per base-station, bits.
    #[arg(long, default_value_t = 5.0)]
    backhaul_bits: f64,
    /// Restrict to one scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct WynerGapArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Number of users.
    #[arg(long, default_value_t = 4)]
    users: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Wz)]
    scheme: SchemeArg,
}

#[derive(Debug, Args)]
struct NncArgs {
    /// Network instance file.
    #[arg(long)]
    instance: std::path::PathBuf,
    /// Common quantization noise level; the noise level when omitted.
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct AllocateArgs {
    /// Network instance file.
    #[arg(long)]
    instance: std::path::PathBuf,
    /// Total backhaul budget, bits.
    #[arg(long)]
    total_bits: f64,
    /// One-based decoding order such as `3,1,2`; searched when omitted.
    #[arg(long)]
    order: Option<String>,
    /// Also run the grid oracle with this step (at most 4 users).
    #[arg(long)]
    oracle_step: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// `key=value` configuration file; defaults otherwise.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    alloc: Option<AllocArg>,
    /// Backhaul per base-station, Mbps.
    #[arg(long)]
    backhaul_mbps: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: std::path::PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

pub(crate) enum Failure {
    Usage(anyhow::Error),
    Verification(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::RkCurve(a) => commands::rk_curve(&a),
        Command::Region(a) => commands::region(&a),
        Command::WynerGap(a) => commands::wyner_gap(&a),
        Command::Nnc(a) => commands::nnc(&a),
        Command::Allocate(a) => commands::allocate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::SweepBackhaul(a) => commands::sweep(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
