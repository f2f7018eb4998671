//! `gfdm`: command-line front-end for window design, transmission,
//! reception and the simulation sweeps.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "gfdm", version, about = "GFDM modem toolkit: windows, tx/rx and link-level sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design the synthesis, dual and (with --L) local analysis windows.
    Windows {
        #[command(flatten)]
        common: Common,
        /// Local window half length; also writes the local windows.
        #[arg(long = "L")]
        l: Option<usize>,
    },
    /// Modulate one block of random bits and write the framed signal.
    Tx {
        #[command(flatten)]
        common: Common,
        /// Also pass the block through the channel at this Es/N0 (dB) and
        /// write the received signal and the channel taps.
        #[arg(long, allow_negative_numbers = true)]
        snr: Option<f64>,
    },
    /// Demodulate a framed block read from CSV.
    Rx {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        receiver: ReceiverArgs,
        /// Framed input signal `(n, re, im)`.
        #[arg(long)]
        input: PathBuf,
        /// Channel taps `(delay, re, im)`; identity channel when absent.
        #[arg(long)]
        taps: Option<PathBuf>,
        /// Analysis window CSV (length N for time-dgt/fd-dgt, 2L+1 for the
        /// local receivers) used instead of designing one.
        #[arg(long)]
        window: Option<PathBuf>,
    },
    /// Uncoded BER sweep.
    Ber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        receiver: ReceiverArgs,
        /// Es/N0 list in dB: `start:step:stop` (inclusive) or one value.
        #[arg(long, default_value = "0:2:20", allow_hyphen_values = true)]
        snr: String,
        /// Minimum simulated bits per SNR point.
        #[arg(long, default_value_t = 100_000)]
        min_bits: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Interference variance per subcarrier for narrowband and broadband
    /// channel statistics.
    Variance {
        #[command(flatten)]
        common: Common,
        /// Comma-separated roll-off factors.
        #[arg(long, default_value = "0.1,0.5,0.9")]
        betas: String,
    },
    /// Multiplication counts per receiver class.
    Complexity {
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Subsymbol range `a:b` (inclusive) or one value.
        #[arg(long = "M", default_value = "1:21")]
        m: String,
        /// Comma-separated subcarrier counts.
        #[arg(long = "K", default_value = "256")]
        k: String,
        #[arg(long = "L", default_value_t = 12)]
        l: usize,
        /// Detection cost per symbol.
        #[arg(long = "J", default_value_t = 4)]
        j: usize,
        /// Filter span of the FFT-based receivers.
        #[arg(long = "I", default_value_t = 2)]
        i: usize,
        /// Cancellation iterations.
        #[arg(long = "I0", default_value_t = 8)]
        i0: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Preset (`default`, `eva_qpsk`, `eva_16qam`) or TOML file with
    /// `K`, `M`, `beta`, `cp_len`, `constellation` and optional `seed`.
    #[arg(long, default_value = "default")]
    config: String,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Channel: `awgn`, `eva` or `eva-scaled:<max delay in samples>`.
    /// Defaults to `eva` for the EVA presets and `awgn` otherwise.
    #[arg(long)]
    channel: Option<String>,
    /// Sampling interval in ns for the EVA profile.
    #[arg(long, default_value_t = 37.2)]
    sample_interval_ns: f64,
    /// Maximum Doppler frequency in Hz.
    #[arg(long, default_value_t = 100.0)]
    doppler_hz: f64,
    /// Tap correlation: `jakes` or `uncorrelated`.
    #[arg(long, default_value = "jakes")]
    correlation: String,
}

#[derive(Args, Debug, Clone)]
struct ReceiverArgs {
    /// `time-dgt`, `fd-dgt`, `trunc`, `ldgt`, `ldgt-stat` or `zf`; `ber`
    /// accepts a comma-separated list.
    #[arg(long, default_value = "fd-dgt")]
    receiver: String,
    /// Local window half length for `trunc`, `ldgt` and `ldgt-stat`.
    #[arg(long = "L")]
    l: Option<usize>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match commands::run(cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
