//! Monte-Carlo experiment runner: BER sweeps, paired error comparisons,
//! variance and complexity sweeps, and their CSV reports.
//!
//! Every block draws from its own ChaCha8 stream, selected by
//! `(snr point, block index)` from the master seed, so results do not
//! depend on the number of worker threads. Blocks run in fixed-size batches
//! and the stopping rule is checked only between batches.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{complexity, interference_variance, ComplexityParams, ComplexityReport, ReceiverClass};
use crate::channel::{apply_channel, realize_channel, ChannelRealization, ChannelStats};
use crate::error::{Error, Result};
use crate::modem::{modulate, strip_and_transform, TimeSignal};
use crate::params::{demap_symbols, map_bits, GfdmConfig, SymbolGrid};
use crate::receivers::{
    detect, dgt_time, fd_dgt_receive, ldgt_receive, subcarrier_gains, truncated_fd_dgt_receive,
    zf_oracle_receive, ReceiverOutput,
};
use crate::scalar::Real;
use crate::windows::{
    build_local_system, dual_window_fullband, ldgt_window_ideal, ldgt_window_stat, rc_synthesis_window,
    truncate_fullband, FreqWindow, LocalWindow,
};

/// Receiver selection. Local variants carry the half length `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReceiverSpec {
    TimeDgt,
    FdDgt,
    Truncated { half_len: usize },
    Ldgt { half_len: usize },
    LdgtStat { half_len: usize },
    Zf,
}

impl ReceiverSpec {
    /// Parses a receiver name (`time-dgt`, `fd-dgt`, `trunc`, `ldgt`,
    /// `ldgt-stat`, `zf`); local receivers require `half_len`.
    pub fn parse(name: &str, half_len: Option<usize>) -> Result<Self> {
        let need = || {
            half_len.ok_or_else(|| Error::InvalidConfig(format!("receiver '{name}' needs a half length L")))
        };
        Ok(match name {
            "time-dgt" => ReceiverSpec::TimeDgt,
            "fd-dgt" => ReceiverSpec::FdDgt,
            "trunc" => ReceiverSpec::Truncated { half_len: need()? },
            "ldgt" => ReceiverSpec::Ldgt { half_len: need()? },
            "ldgt-stat" => ReceiverSpec::LdgtStat { half_len: need()? },
            "zf" => ReceiverSpec::Zf,
            other => return Err(Error::InvalidConfig(format!("unknown receiver '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReceiverSpec::TimeDgt => "time-dgt",
            ReceiverSpec::FdDgt => "fd-dgt",
            ReceiverSpec::Truncated { .. } => "trunc",
            ReceiverSpec::Ldgt { .. } => "ldgt",
            ReceiverSpec::LdgtStat { .. } => "ldgt-stat",
            ReceiverSpec::Zf => "zf",
        }
    }
}

impl fmt::Display for ReceiverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverSpec::Truncated { half_len }
            | ReceiverSpec::Ldgt { half_len }
            | ReceiverSpec::LdgtStat { half_len } => write!(f, "{}(L={half_len})", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

/// Propagation model for simulations.
#[derive(Clone, Debug)]
pub enum ChannelSpec {
    /// Identity channel; only additive noise.
    Awgn,
    /// Block Rayleigh fading with the given statistics.
    Fading(ChannelStats),
}

impl ChannelSpec {
    /// Statistics seen by the channel-statistics window.
    pub fn stats(&self, cfg: &GfdmConfig) -> ChannelStats {
        match self {
            ChannelSpec::Awgn => ChannelStats::flat(cfg.n()),
            ChannelSpec::Fading(s) => s.clone(),
        }
    }

    pub fn realize<T: Real, R: Rng + ?Sized>(&self, cfg: &GfdmConfig, rng: &mut R) -> ChannelRealization<T> {
        match self {
            ChannelSpec::Awgn => ChannelRealization::identity(cfg.n()),
            ChannelSpec::Fading(s) => realize_channel(s, rng),
        }
    }
}

#[derive(Clone, Debug)]
enum Stage<T> {
    Time(Vec<Complex<T>>),
    Full(FreqWindow<T>),
    Truncated(LocalWindow<T>),
    Local(LocalWindow<T>),
    Zf,
}

/// A receiver with its windows designed once, ready to process blocks.
#[derive(Clone, Debug)]
pub struct PreparedReceiver<T> {
    spec: ReceiverSpec,
    cfg: GfdmConfig,
    synthesis: FreqWindow<T>,
    stage: Stage<T>,
}

impl<T: Real> PreparedReceiver<T> {
    pub fn new(spec: ReceiverSpec, cfg: &GfdmConfig, channel: &ChannelSpec) -> Result<Self> {
        let g = rc_synthesis_window::<T>(cfg);
        let stage = match spec {
            ReceiverSpec::TimeDgt => Stage::Time(dual_window_fullband(&g, cfg)?.to_time()),
            ReceiverSpec::FdDgt => Stage::Full(dual_window_fullband(&g, cfg)?),
            ReceiverSpec::Truncated { half_len } => {
                Stage::Truncated(truncate_fullband(&dual_window_fullband(&g, cfg)?, half_len)?)
            }
            ReceiverSpec::Ldgt { half_len } => {
                Stage::Local(ldgt_window_ideal(&build_local_system(&g, half_len, cfg)?)?)
            }
            ReceiverSpec::LdgtStat { half_len } => Stage::Local(ldgt_window_stat(
                &build_local_system(&g, half_len, cfg)?,
                &channel.stats(cfg),
                cfg,
            )?),
            ReceiverSpec::Zf => Stage::Zf,
        };
        Ok(Self {
            spec,
            cfg: cfg.clone(),
            synthesis: g,
            stage,
        })
    }

    pub fn spec(&self) -> ReceiverSpec {
        self.spec
    }

    pub fn synthesis(&self) -> &FreqWindow<T> {
        &self.synthesis
    }

    /// The local window in use, for local receivers.
    pub fn local_window(&self) -> Option<&LocalWindow<T>> {
        match &self.stage {
            Stage::Truncated(w) | Stage::Local(w) => Some(w),
            _ => None,
        }
    }

    /// Soft statistics only.
    pub fn soft(&self, y: &TimeSignal<T>, h: &ChannelRealization<T>) -> Result<(SymbolGrid<T>, Vec<Complex<T>>)> {
        let cfg = &self.cfg;
        let one = Complex::new(T::one(), T::zero());
        Ok(match &self.stage {
            Stage::Time(gamma) => {
                if y.samples().len() != cfg.n() + cfg.cp_len() {
                    return Err(Error::Shape {
                        context: "framed received block (N + cp_len)",
                        expected: cfg.n() + cfg.cp_len(),
                        actual: y.samples().len(),
                    });
                }
                let block = TimeSignal::new(y.block().to_vec(), 0);
                (dgt_time(&block, gamma, cfg)?, subcarrier_gains(h.response(), cfg))
            }
            Stage::Full(gamma) => (
                fd_dgt_receive(&strip_and_transform(y, cfg)?, gamma, cfg)?,
                subcarrier_gains(h.response(), cfg),
            ),
            Stage::Truncated(w) => (
                truncated_fd_dgt_receive(&strip_and_transform(y, cfg)?, w, cfg)?,
                subcarrier_gains(h.response(), cfg),
            ),
            Stage::Local(w) => (
                ldgt_receive(&strip_and_transform(y, cfg)?, w, cfg)?,
                subcarrier_gains(h.response(), cfg),
            ),
            Stage::Zf => (
                zf_oracle_receive(y, h, &self.synthesis, cfg)?,
                vec![one; cfg.k()],
            ),
        })
    }

    /// Soft statistics followed by detection.
    pub fn receive(&self, y: &TimeSignal<T>, h: &ChannelRealization<T>) -> Result<ReceiverOutput<T>> {
        let (soft_grid, channel_gains) = self.soft(y, h)?;
        let det = detect(&soft_grid, &channel_gains, &self.cfg)?;
        Ok(ReceiverOutput {
            soft_grid,
            hard_grid: det.symbols,
            channel_gains,
            flagged: det.flagged,
        })
    }
}

/// Noise standard deviation per sample for `Es/N0 = snr_db` with unit
/// symbol energy (`sigma^2 = 1/SNR`).
pub fn snr_to_sigma(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 20.0)
    }
}

/// Inclusive grid `start, start+step, ..., stop`.
pub fn snr_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "SNR range {start}:{step}:{stop} must have step > 0 and stop >= start"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Parses `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let nums: Vec<f64> = text
        .split(':')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("invalid SNR value '{s}'")))
        })
        .collect::<Result<_>>()?;
    match nums.as_slice() {
        [v] => Ok(vec![*v]),
        [a, s, b] => snr_grid(*a, *s, *b),
        _ => Err(Error::InvalidConfig(format!("SNR list '{text}' must be start:step:stop"))),
    }
}

/// Random stream for block `block` of SNR point `point`.
pub fn block_rng(master_seed: u64, point: usize, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 40) ^ block);
    rng
}

/// One BER measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

/// BER versus SNR for one receiver.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerCurve {
    pub receiver: String,
    pub config_summary: String,
    pub points: Vec<BerPoint>,
    pub master_seed: u64,
}

/// Stopping rule and parallelism of a BER sweep.
///
/// A point stops once `bits >= min_bits` and either `min_errors` errors
/// were seen or `max_bits` were simulated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerOptions {
    pub min_bits: u64,
    pub max_bits: u64,
    pub min_errors: u64,
    pub batch_blocks: usize,
    pub threads: Option<usize>,
}

impl BerOptions {
    pub fn new(min_bits: u64) -> Self {
        Self {
            min_bits,
            max_bits: min_bits.saturating_mul(10),
            min_errors: 100,
            batch_blocks: 32,
            threads: None,
        }
    }
}

fn config_summary(cfg: &GfdmConfig) -> String {
    format!(
        "K={} M={} beta={} cp={} {}",
        cfg.k(),
        cfg.m(),
        cfg.beta(),
        cfg.cp_len(),
        cfg.constellation()
    )
}

/// Draws one block: data bits, grid, and the received frame.
fn draw_block(
    cfg: &GfdmConfig,
    g: &FreqWindow<f64>,
    channel: &ChannelSpec,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<u8>, SymbolGrid<f64>, ChannelRealization<f64>, TimeSignal<f64>)> {
    let bits: Vec<u8> = (0..cfg.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
    let d = map_bits::<f64>(&bits, cfg)?;
    let x = modulate(&d, g, cfg)?;
    let h = channel.realize::<f64, _>(cfg, rng);
    let y = apply_channel(&x, &h, sigma, rng)?;
    Ok((bits, d, h, y))
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// BER sweep with the default stopping rule of [`BerOptions::new`].
pub fn run_ber(
    cfg: &GfdmConfig,
    receiver: ReceiverSpec,
    channel: &ChannelSpec,
    snr_db_list: &[f64],
    min_bits: u64,
    master_seed: u64,
) -> Result<BerCurve> {
    run_ber_with(cfg, receiver, channel, snr_db_list, BerOptions::new(min_bits), master_seed)
}

/// Uncoded BER sweep: bits, mapping, modulation, channel, receiver,
/// detection and demapping per block.
pub fn run_ber_with(
    cfg: &GfdmConfig,
    receiver: ReceiverSpec,
    channel: &ChannelSpec,
    snr_db_list: &[f64],
    options: BerOptions,
    master_seed: u64,
) -> Result<BerCurve> {
    if let ChannelSpec::Fading(s) = channel {
        if s.max_delay() > cfg.cp_len() {
            return Err(Error::CyclicPrefixTooShort {
                cp_len: cfg.cp_len(),
                max_delay: s.max_delay(),
            });
        }
    }
    let rx = PreparedReceiver::<f64>::new(receiver, cfg, channel)?;
    let g = rx.synthesis().clone();
    let per_block = cfg.bits_per_block() as u64;
    let batch = options.batch_blocks.max(1) as u64;

    let points = with_threads(options.threads, || -> Result<Vec<BerPoint>> {
        let mut points = Vec::with_capacity(snr_db_list.len());
        for (pi, &snr_db) in snr_db_list.iter().enumerate() {
            let sigma = snr_to_sigma(snr_db);
            let (mut bits, mut errors, mut next) = (0u64, 0u64, 0u64);
            loop {
                let counts: Vec<u64> = (next..next + batch)
                    .into_par_iter()
                    .map(|b| -> Result<u64> {
                        let mut rng = block_rng(master_seed, pi, b);
                        let (tx_bits, _, h, y) = draw_block(cfg, &g, channel, sigma, &mut rng)?;
                        let out = rx.receive(&y, &h)?;
                        let rx_bits = demap_symbols(&out.hard_grid, cfg)?;
                        Ok(tx_bits.iter().zip(&rx_bits).filter(|(a, b)| a != b).count() as u64)
                    })
                    .collect::<Result<_>>()?;
                next += batch;
                bits += per_block * batch;
                errors += counts.iter().sum::<u64>();
                if bits >= options.min_bits && (errors >= options.min_errors || bits >= options.max_bits) {
                    break;
                }
            }
            points.push(BerPoint {
                snr_db,
                bits,
                bit_errors: errors,
                ber: errors as f64 / bits as f64,
            });
        }
        Ok(points)
    })??;

    Ok(BerCurve {
        receiver: receiver.to_string(),
        config_summary: config_summary(cfg),
        points,
        master_seed,
    })
}

/// Mean squared symbol error `E|Y_{k,m} - H(c_k) d_{k,m}|^2` of several
/// receivers over the same `blocks` draws (shared data, channel and noise).
pub fn paired_symbol_mse(
    cfg: &GfdmConfig,
    receivers: &[ReceiverSpec],
    channel: &ChannelSpec,
    snr_db: f64,
    blocks: u64,
    master_seed: u64,
) -> Result<Vec<f64>> {
    let prepared: Vec<PreparedReceiver<f64>> = receivers
        .iter()
        .map(|&r| PreparedReceiver::new(r, cfg, channel))
        .collect::<Result<_>>()?;
    let g = prepared
        .first()
        .map(|p| p.synthesis().clone())
        .unwrap_or_else(|| rc_synthesis_window(cfg));
    let sigma = snr_to_sigma(snr_db);
    let per_block: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let mut rng = block_rng(master_seed, 0, b);
            let (_, d, h, y) = draw_block(cfg, &g, channel, sigma, &mut rng)?;
            prepared
                .iter()
                .map(|rx| {
                    let (soft, gains) = rx.soft(&y, &h)?;
                    let mut acc = 0.0;
                    for k in 0..cfg.k() {
                        for m in 0..cfg.m() {
                            acc += (soft.get(k, m) - gains[k] * d.get(k, m)).norm_sqr();
                        }
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let symbols = (blocks as f64) * cfg.n() as f64;
    Ok((0..receivers.len())
        .map(|r| per_block.iter().map(|v| v[r]).sum::<f64>() / symbols)
        .collect())
}

/// One row of a variance sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceRow {
    pub profile: String,
    pub beta: f64,
    pub k: usize,
    pub variance: f64,
}

/// Interference variance (at `m = 0`) for every named profile, roll-off
/// and subcarrier.
pub fn run_variance_sweep(
    cfg: &GfdmConfig,
    stats_list: &[(String, ChannelStats)],
    beta_list: &[f64],
) -> Result<Vec<VarianceRow>> {
    let mut rows = Vec::new();
    for &beta in beta_list {
        let c = cfg.with_beta(beta)?;
        let g = rc_synthesis_window::<f64>(&c);
        let gamma = dual_window_fullband(&g, &c)?;
        for (name, stats) in stats_list {
            let vars: Vec<f64> = (0..c.k())
                .into_par_iter()
                .map(|k| interference_variance(k, 0, &g, &gamma, stats, &c))
                .collect::<Result<_>>()?;
            rows.extend(vars.into_iter().enumerate().map(|(k, variance)| VarianceRow {
                profile: name.clone(),
                beta,
                k,
                variance,
            }));
        }
    }
    Ok(rows)
}

/// Operation counts of every receiver class over `M` in `m_range` and `K`
/// in `k_set`.
pub fn run_complexity_sweep(
    m_range: std::ops::RangeInclusive<usize>,
    k_set: &[usize],
    l: usize,
    j: usize,
    i: usize,
    i0: usize,
) -> Result<Vec<ComplexityReport>> {
    let mut out = Vec::new();
    for &k in k_set {
        for m in m_range.clone() {
            for r in ReceiverClass::ALL {
                out.push(complexity(r, ComplexityParams { m, k, l, j, i, i0 })?);
            }
        }
    }
    Ok(out)
}

/// `receiver,snr_db,bits,errors,ber`.
pub fn write_ber_csv<W: Write>(writer: W, curves: &[BerCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["receiver", "snr_db", "bits", "errors", "ber"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.receiver.clone(),
                p.snr_db.to_string(),
                p.bits.to_string(),
                p.bit_errors.to_string(),
                format!("{:.16e}", p.ber),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `profile,beta,k,variance`.
pub fn write_variance_csv<W: Write>(writer: W, rows: &[VarianceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["profile", "beta", "k", "variance"])?;
    for r in rows {
        w.write_record([
            r.profile.clone(),
            r.beta.to_string(),
            r.k.to_string(),
            format!("{:.16e}", r.variance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `receiver,M,K,L,count`.
pub fn write_complexity_csv<W: Write>(writer: W, rows: &[ComplexityReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["receiver", "M", "K", "L", "count"])?;
    for r in rows {
        w.write_record([
            r.receiver.to_string(),
            r.params.m.to_string(),
            r.params.k.to_string(),
            r.params.l.to_string(),
            r.count().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl FromStr for ReceiverSpec {
    type Err = Error;
    /// Accepts `name` or `name:L`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, l)) => {
                let l = l
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("invalid half length in '{s}'")))?;
                ReceiverSpec::parse(name, Some(l))
            }
            None => ReceiverSpec::parse(s, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_lists() {
        assert_eq!(parse_snr_list("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_snr_list("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_list("7").unwrap(), vec![7.0]);
        assert!(parse_snr_list("3:1").is_err());
        assert!(parse_snr_list("3:0:4").is_err());
    }

    #[test]
    fn receiver_names() {
        assert_eq!("ldgt:9".parse::<ReceiverSpec>().unwrap(), ReceiverSpec::Ldgt { half_len: 9 });
        assert!("ldgt".parse::<ReceiverSpec>().is_err());
        assert_eq!("zf".parse::<ReceiverSpec>().unwrap(), ReceiverSpec::Zf);
        assert!("mmse".parse::<ReceiverSpec>().is_err());
    }

    #[test]
    fn sigma_from_snr() {
        assert_eq!(snr_to_sigma(f64::INFINITY), 0.0);
        assert!((snr_to_sigma(10.0).powi(2) - 0.1).abs() < 1e-15);
    }
}
