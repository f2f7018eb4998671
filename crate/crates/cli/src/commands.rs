use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use gfdm_core::harness::{
    block_rng, parse_snr_list, run_ber_with, run_complexity_sweep, run_variance_sweep, snr_to_sigma, write_ber_csv,
    write_complexity_csv, write_variance_csv, BerOptions,
};
use gfdm_core::params::{config_to_toml, load_config};
use gfdm_core::prelude::*;
use gfdm_core::windows::{
    read_freq_window_csv, read_indexed_csv, read_local_window_csv, wexler_raz_residual, write_freq_window_csv,
    write_indexed_csv, write_local_window_csv,
};
use rand::Rng;
use serde::Serialize;

use crate::{Command, Common, ReceiverArgs};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Singular { .. }) => 3,
            CliError::Core(Error::Io(_)) | CliError::Io(_) | CliError::Json(_) => 4,
            CliError::Core(_) | CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Json(e) => write!(f, "manifest: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Everything needed to repeat a run.
#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    version: String,
    argv: Vec<String>,
    config: Option<GfdmConfig>,
    config_toml: Option<String>,
    channel: Option<String>,
    master_seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    timestamp_unix_s: u64,
    wall_time_s: f64,
}

struct Run {
    subcommand: &'static str,
    argv: Vec<String>,
    out: PathBuf,
    started: Instant,
    config: Option<GfdmConfig>,
    channel: Option<String>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn new(subcommand: &'static str, argv: &[String], out: &Path) -> Result<Self> {
        fs::create_dir_all(out)?;
        Ok(Self {
            subcommand,
            argv: argv.to_vec(),
            out: out.to_path_buf(),
            started: Instant::now(),
            config: None,
            channel: None,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            version: format!("v{}", env!("CARGO_PKG_VERSION")),
            argv: self.argv,
            config_toml: self.config.as_ref().map(|c| config_to_toml(c, self.seed)),
            config: self.config,
            channel: self.channel,
            master_seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(CliError::Json)?;
        fs::write(self.out.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

struct Setup {
    cfg: GfdmConfig,
    seed: u64,
    channel: ChannelSpec,
    channel_name: String,
}

fn preset(name: &str) -> Option<(GfdmConfig, bool)> {
    let (beta, con, eva) = match name {
        "default" => (0.1, Constellation::Qpsk, false),
        "eva_qpsk" => (0.9, Constellation::Qpsk, true),
        "eva_16qam" => (0.9, Constellation::Qam16, true),
        _ => return None,
    };
    Some((build_config(256, 7, beta, 80, con).expect("preset is valid"), eva))
}

fn setup(common: &Common) -> Result<Setup> {
    let (cfg, file_seed, eva) = match preset(&common.config) {
        Some((cfg, eva)) => (cfg, None, eva),
        None => {
            let (cfg, seed) = load_config(&common.config)?;
            (cfg, seed, false)
        }
    };
    let correlation = match common.correlation.as_str() {
        "jakes" => TapCorrelation::Jakes,
        "uncorrelated" => TapCorrelation::Uncorrelated,
        other => return Err(CliError::Usage(format!("unknown tap correlation '{other}'"))),
    };
    let name = common
        .channel
        .clone()
        .unwrap_or_else(|| if eva { "eva" } else { "awgn" }.to_string());
    let channel = match name.as_str() {
        "awgn" => ChannelSpec::Awgn,
        "eva" => ChannelSpec::Fading(
            eva_stats(common.sample_interval_ns, common.doppler_hz, &cfg)?.with_correlation(correlation),
        ),
        other => match other.strip_prefix("eva-scaled:") {
            Some(d) => {
                let d: usize = d
                    .parse()
                    .map_err(|_| CliError::Usage(format!("invalid delay spread in '{other}'")))?;
                let kd = common.doppler_hz * cfg.n() as f64 * common.sample_interval_ns * 1e-9;
                ChannelSpec::Fading(eva_scaled_stats(d, kd, &cfg)?.with_correlation(correlation))
            }
            None => return Err(CliError::Usage(format!("unknown channel '{other}'"))),
        },
    };
    Ok(Setup {
        seed: common.seed.or(file_seed).unwrap_or(0),
        channel_name: format!("{name} ({})", common.correlation),
        cfg,
        channel,
    })
}

fn start(subcommand: &'static str, argv: &[String], common: &Common, s: &Setup) -> Result<Run> {
    let mut run = Run::new(subcommand, argv, &common.out)?;
    run.config = Some(s.cfg.clone());
    run.seed = Some(s.seed);
    run.channel = Some(s.channel_name.clone());
    Ok(run)
}

pub fn run(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Windows { common, l } => windows(&common, l, argv),
        Command::Tx { common, snr } => tx(&common, snr, argv),
        Command::Rx {
            common,
            receiver,
            input,
            taps,
            window,
        } => rx(&common, &receiver, &input, taps.as_deref(), window.as_deref(), argv),
        Command::Ber {
            common,
            receiver,
            snr,
            min_bits,
            threads,
        } => ber(&common, &receiver, &snr, min_bits, threads, argv),
        Command::Variance { common, betas } => variance(&common, &betas, argv),
        Command::Complexity { out, m, k, l, j, i, i0 } => {
            let m_range = parse_range(&m)?;
            let k_set = parse_list::<usize>(&k, "K")?;
            let mut run = Run::new("complexity", argv, &out)?;
            let rows = run_complexity_sweep(m_range, &k_set, l, j, i, i0)?;
            write_complexity_csv(fs::File::create(run.output("complexity.csv"))?, &rows)?;
            run.finish()
        }
    }
}

fn windows(common: &Common, l: Option<usize>, argv: &[String]) -> Result<()> {
    let s = setup(common)?;
    let mut run = start("windows", argv, common, &s)?;
    let g = rc_synthesis_window::<f64>(&s.cfg);
    let gamma = dual_window_fullband(&g, &s.cfg)?;
    write_freq_window_csv(run.output("synthesis.csv"), &g)?;
    write_freq_window_csv(run.output("dual.csv"), &gamma)?;
    println!("biorthogonality residual {:.3e}", wexler_raz_residual(&g, &gamma, &s.cfg)?);
    if let Some(l) = l {
        let sys = build_local_system(&g, l, &s.cfg)?;
        let ideal = ldgt_window_ideal(&sys)?;
        let stat = ldgt_window_stat(&sys, &s.channel.stats(&s.cfg), &s.cfg)?;
        let trunc = truncate_fullband(&gamma, l)?;
        write_local_window_csv(run.output(&format!("ldgt_L{l}.csv")), &ideal)?;
        write_local_window_csv(run.output(&format!("ldgt_stat_L{l}.csv")), &stat)?;
        write_local_window_csv(run.output(&format!("trunc_L{l}.csv")), &trunc)?;
        println!(
            "local L={l}: least-squares residual {:.3e}, truncated {:.3e}",
            sys.ls_residual(&ideal, 0)?,
            sys.ls_residual(&trunc, 0)?
        );
    }
    run.finish()
}

fn write_symbols(path: &Path, out: &ReceiverOutput<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "k,m,soft_re,soft_im,hard_re,hard_im")?;
    let (kk, mm) = out.soft_grid.shape();
    for k in 0..kk {
        for m in 0..mm {
            let (s, h) = (out.soft_grid.get(k, m), out.hard_grid.get(k, m));
            writeln!(f, "{k},{m},{:.16e},{:.16e},{:.16e},{:.16e}", s.re, s.im, h.re, h.im)?;
        }
    }
    f.flush()?;
    Ok(())
}

fn write_bits(path: &Path, bits: &[u8]) -> Result<()> {
    let text: String = bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
    fs::write(path, text + "\n")?;
    Ok(())
}

fn tx(common: &Common, snr: Option<f64>, argv: &[String]) -> Result<()> {
    let s = setup(common)?;
    let mut run = start("tx", argv, common, &s)?;
    let mut rng = block_rng(s.seed, 0, 0);
    let bits: Vec<u8> = (0..s.cfg.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
    let grid = map_bits::<f64>(&bits, &s.cfg)?;
    let g = rc_synthesis_window::<f64>(&s.cfg);
    let x = modulate(&grid, &g, &s.cfg)?;
    write_bits(&run.output("bits.txt"), &bits)?;
    x.write_csv(run.output("tx.csv"))?;
    if let Some(snr) = snr {
        let h = s.channel.realize::<f64, _>(&s.cfg, &mut rng);
        let y = apply_channel(&x, &h, snr_to_sigma(snr), &mut rng)?;
        y.write_csv(run.output("rx.csv"))?;
        let f = fs::File::create(run.output("taps.csv"))?;
        write_indexed_csv(f, "delay", h.taps().iter().map(|&(d, z)| (d as i64, z)))?;
    }
    run.finish()
}

fn rx(
    common: &Common,
    receiver: &ReceiverArgs,
    input: &Path,
    taps: Option<&Path>,
    window: Option<&Path>,
    argv: &[String],
) -> Result<()> {
    let s = setup(common)?;
    let cfg = &s.cfg;
    let mut run = start("rx", argv, common, &s)?;
    run.inputs.push(input.to_path_buf());
    let y = TimeSignal::<f64>::read_csv(input, cfg.cp_len())?;
    if y.samples().len() != cfg.n() + cfg.cp_len() {
        return Err(CliError::Usage(format!(
            "input has {} samples, expected N + cp_len = {}",
            y.samples().len(),
            cfg.n() + cfg.cp_len()
        )));
    }
    let h = match taps {
        Some(p) => {
            run.inputs.push(p.to_path_buf());
            let rows = read_indexed_csv::<f64, _>(fs::File::open(p)?)?;
            let taps = rows
                .into_iter()
                .map(|(d, z)| {
                    usize::try_from(d)
                        .map(|d| (d, z))
                        .map_err(|_| CliError::Usage(format!("negative tap delay {d}")))
                })
                .collect::<Result<Vec<_>>>()?;
            ChannelRealization::from_taps(taps, cfg.n())
        }
        None => ChannelRealization::identity(cfg.n()),
    };
    let spec = ReceiverSpec::parse(&receiver.receiver, receiver.l)?;
    let out = match window {
        None => PreparedReceiver::<f64>::new(spec, cfg, &s.channel)?.receive(&y, &h)?,
        Some(p) => {
            run.inputs.push(p.to_path_buf());
            let spectrum = strip_and_transform(&y, cfg)?;
            let soft = match spec {
                ReceiverSpec::TimeDgt | ReceiverSpec::FdDgt => {
                    let gamma = read_freq_window_csv::<f64>(p, cfg.tau(), WindowKind::AnalysisFull)?;
                    if gamma.len() != cfg.n() {
                        return Err(CliError::Usage(format!(
                            "window has {} bins, expected N = {}",
                            gamma.len(),
                            cfg.n()
                        )));
                    }
                    if spec == ReceiverSpec::TimeDgt {
                        dgt_time(&TimeSignal::new(y.block().to_vec(), 0), &gamma.to_time(), cfg)?
                    } else {
                        fd_dgt_receive(&spectrum, &gamma, cfg)?
                    }
                }
                ReceiverSpec::Truncated { .. } => {
                    truncated_fd_dgt_receive(&spectrum, &read_local_window_csv(p)?, cfg)?
                }
                ReceiverSpec::Ldgt { .. } | ReceiverSpec::LdgtStat { .. } => {
                    ldgt_receive(&spectrum, &read_local_window_csv(p)?, cfg)?
                }
                ReceiverSpec::Zf => return Err(CliError::Usage("the zf receiver takes no window".into())),
            };
            let gains = subcarrier_gains(h.response(), cfg);
            let det = detect(&soft, &gains, cfg)?;
            ReceiverOutput {
                soft_grid: soft,
                hard_grid: det.symbols,
                channel_gains: gains,
                flagged: det.flagged,
            }
        }
    };
    if out.flagged > 0 {
        eprintln!("warning: {} symbols detected on a zero channel gain", out.flagged);
    }
    write_symbols(&run.output("symbols.csv"), &out)?;
    write_bits(&run.output("bits.txt"), &demap_symbols(&out.hard_grid, cfg)?)?;
    run.finish()
}

fn ber(
    common: &Common,
    receiver: &ReceiverArgs,
    snr: &str,
    min_bits: u64,
    threads: Option<usize>,
    argv: &[String],
) -> Result<()> {
    let s = setup(common)?;
    let snrs = parse_snr_list(snr)?;
    let specs = receiver
        .receiver
        .split(',')
        .map(|name| ReceiverSpec::parse(name.trim(), receiver.l))
        .collect::<gfdm_core::Result<Vec<_>>>()?;
    let mut run = start("ber", argv, common, &s)?;
    let mut options = BerOptions::new(min_bits);
    options.threads = threads;
    let mut curves = Vec::new();
    for spec in specs {
        let curve = run_ber_with(&s.cfg, spec, &s.channel, &snrs, options, s.seed)?;
        for p in &curve.points {
            println!("{} snr {:>6.2} dB  ber {:.4e}  ({} bits)", curve.receiver, p.snr_db, p.ber, p.bits);
        }
        curves.push(curve);
    }
    write_ber_csv(fs::File::create(run.output("ber.csv"))?, &curves)?;
    run.finish()
}

fn variance(common: &Common, betas: &str, argv: &[String]) -> Result<()> {
    let s = setup(common)?;
    let betas = parse_list::<f64>(betas, "beta")?;
    let broadband = match &s.channel {
        ChannelSpec::Fading(stats) => stats.clone(),
        ChannelSpec::Awgn => eva_stats(common.sample_interval_ns, common.doppler_hz, &s.cfg)?,
    };
    let profiles = vec![
        ("narrowband".to_string(), ChannelStats::flat(s.cfg.n())),
        ("broadband".to_string(), broadband),
    ];
    let mut run = start("variance", argv, common, &s)?;
    let rows = run_variance_sweep(&s.cfg, &profiles, &betas)?;
    write_variance_csv(fs::File::create(run.output("variance.csv"))?, &rows)?;
    run.finish()
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid {what} value '{v}'")))
        })
        .collect()
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || CliError::Usage(format!("invalid range '{text}', expected a:b or a single value"));
    let parts: Vec<usize> = text
        .split(':')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a] => Ok(*a..=*a),
        [a, b] if a <= b => Ok(*a..=*b),
        _ => Err(bad()),
    }
}
