//! `zeno`: command-line front end for the spin-chain simulator.
//!
//! Every subcommand writes one table. Exit codes: 0 success, 1 usage or
//! validation error, 2 numerical failure (including a failed oracle check).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;
use zeno_core::trajectory::DEFAULT_F_MEAS;
use zeno_core::ExecutionMode;

#[derive(Parser, Debug)]
#[command(
    name = "zeno",
    version,
    about = "Measurement-driven transport and gates on a Zeno-controlled spin-1 chain"
)]
struct Cli {
    /// Master seed; trial i uses stream i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file. Defaults to $ZENO_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-qubit transport: swap, imaging or compression scheme.
    Transfer(TransferArgs),
    /// Repeat-until-success W(φ) gate.
    Gate(GateArgs),
    /// Two-qubit parity measurement.
    Parity(ParityArgs),
    /// Pair creation from the empty block away from the ULS point.
    Paircreate(PairArgs),
    /// |g|, arg g and outcome probabilities on a two-site block.
    Gfunctions(GArgs),
    /// Full-chain verification suite; exits 2 if any check fails.
    OracleVerify(OracleArgs),
    /// Single-qubit rotation from site-local magnetic fields.
    Rotate(RotateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Swap,
    Imaging,
    Compress,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Physical,
}

#[derive(Args, Clone, Copy, Debug, Serialize)]
pub struct ModeArgs {
    /// Ideal Zeno limit or stroboscopic boundary measurement.
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    /// Boundary measurement rate in physical mode.
    #[arg(long, default_value_t = DEFAULT_F_MEAS)]
    pub f_meas: f64,
}

impl ModeArgs {
    pub fn execution_mode(&self) -> ExecutionMode {
        match self.mode {
            Mode::Ideal => ExecutionMode::Ideal,
            Mode::Physical => ExecutionMode::Physical {
                f_meas: self.f_meas,
            },
        }
    }
}

fn positive_trials() -> clap::builder::RangedU64ValueParser<u64> {
    clap::value_parser!(u64).range(1..)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct TransferArgs {
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Sites to transfer across (swap, imaging).
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Swap interval Δt (swap) or imaging interval ΔT (imaging); comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1.39")]
    pub dt: Vec<f64>,
    /// Boundary shift rates f (compress); comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub f: Vec<f64>,
    /// Use the standard rate grid 0, 0.5, 1, 1.4, 2, 4, 10 (compress).
    #[arg(long)]
    pub sweep_f: bool,
    /// Emit the density p(t, k) of one trajectory at the first rate (compress).
    #[arg(long)]
    pub profile: bool,
    /// Imaging block size; defaults to ⌈2ΔT⌉ + 12.
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 100, value_parser = positive_trials())]
    pub trials: u64,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct GateArgs {
    /// Target relative phase φ.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    pub phi: f64,
    /// Input pair, e.g. "up,down", "singlet", or four real amplitudes.
    #[arg(long, default_value = "up,down")]
    pub state: String,
    /// Which unitary switching time t* to use, 0 = smallest.
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    #[arg(long, default_value_t = zeno_core::protocols::DEFAULT_GATE_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 100, value_parser = positive_trials())]
    pub trials: u64,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ParityArgs {
    #[arg(long, default_value = "up,down")]
    pub state: String,
    #[arg(long, default_value_t = zeno_core::protocols::DEFAULT_PARITY_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 10_000, value_parser = positive_trials())]
    pub trials: u64,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct PairArgs {
    /// Bilinear-biquadratic angle θ.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8, allow_negative_numbers = true)]
    pub theta: f64,
    /// Overall coupling J̃.
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 9000, value_parser = positive_trials())]
    pub trials: u64,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct GArgs {
    #[arg(long, default_value_t = 3.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 3000)]
    pub steps: usize,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct OracleArgs {
    /// Chain length for the size-dependent checks (at most 8).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Lowest rung of the Zeno frequency ladder.
    #[arg(long, default_value_t = 100.0)]
    pub zeno_f: f64,
    /// Measurement rate for the two-qubit effective-dynamics check.
    #[arg(long, default_value_t = 1000.0)]
    pub two_qubit_f: f64,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct RotateArgs {
    /// Field (Bx,By,Bz) on one site; repeat for sites 1, 2, ...
    #[arg(long = "field", value_parser = parse_field, allow_negative_numbers = true, required = true)]
    pub fields: Vec<[f64; 3]>,
    /// Site holding the qubit.
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    #[arg(long, value_enum, default_value_t = VacuumArg::Zero)]
    pub vacuum: VacuumArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VacuumArg {
    Zero,
    Down,
}

fn parse_field(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected Bx,By,Bz, got {s:?}"));
    }
    let mut b = [0.0f64; 3];
    for (slot, p) in b.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(b)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let run = match &cli.command {
        Command::Transfer(a) => commands::transfer(a, cli.seed),
        Command::Gate(a) => commands::gate(a, cli.seed),
        Command::Parity(a) => commands::parity(a, cli.seed),
        Command::Paircreate(a) => commands::paircreate(a, cli.seed),
        Command::Gfunctions(a) => commands::gfunctions(a, cli.seed),
        Command::OracleVerify(a) => commands::oracle_verify(a, cli.seed),
        Command::Rotate(a) => commands::rotate(a, cli.seed),
    };
    match run {
        Ok(done) => {
            if let Err(e) = output::emit(&done.report, cli.format, cli.output.as_deref()) {
                eprintln!("zeno: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if done.checks_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("zeno: one or more numerical checks failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("zeno: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
