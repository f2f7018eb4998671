//! DGT-family receivers, symbol detection and a dense zero-forcing oracle.
//!
//! Subcarrier `k` of the transmit filter bank is centred on frequency bin
//! `(-kM)_N`; all receivers read the channel gain `H(kM)` at that bin.

use num_complex::Complex;
use num_traits::Zero;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::fft;
use crate::linalg::{CMatrix, Lu};
use crate::modem::{idgt_freq, Spectrum, TimeSignal};
use crate::params::{nearest_index, GfdmConfig, SymbolGrid};
use crate::scalar::{lit, Real};
use crate::windows::{FreqWindow, LocalWindow};

/// Soft statistics, decisions and the per-subcarrier gains used to make them.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverOutput<T> {
    pub soft_grid: SymbolGrid<T>,
    pub hard_grid: SymbolGrid<T>,
    pub channel_gains: Vec<Complex<T>>,
    /// Symbols decided on a zero or non-finite gain.
    pub flagged: usize,
}

/// Hard decisions plus the number of symbols decided on a zero gain.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection<T> {
    pub symbols: SymbolGrid<T>,
    pub flagged: usize,
}

/// Centre bin `(-kM)_N` of subcarrier `k`.
pub fn subcarrier_center(k: usize, cfg: &GfdmConfig) -> usize {
    (cfg.n() - (k * cfg.m()) % cfg.n()) % cfg.n()
}

/// `H` sampled at every subcarrier centre.
pub fn subcarrier_gains<T: Real>(h: &Spectrum<T>, cfg: &GfdmConfig) -> Vec<Complex<T>> {
    (0..cfg.k())
        .map(|k| h.bins()[subcarrier_center(k, cfg)])
        .collect()
}

/// `out_{k,m} = sum_j Y((j - kM)_N) conj(w_j) e^{j2pi mj/M}` over the
/// window taps `(j, w_j)`: a banded product folded modulo `M`, then an
/// `M`-point inverse transform per subcarrier.
fn windowed_dgt<T: Real>(
    y: &Spectrum<T>,
    taps: &[(i64, Complex<T>)],
    cfg: &GfdmConfig,
) -> Result<SymbolGrid<T>> {
    y.check_len(cfg)?;
    let (n, m) = (cfg.n() as i64, cfg.m());
    let mut out = SymbolGrid::zeros(cfg.k(), m);
    let mut fold = vec![Complex::zero(); m];
    for k in 0..cfg.k() {
        fold.iter_mut().for_each(|v| *v = Complex::zero());
        let base = (k * m) as i64;
        for &(j, w) in taps {
            let r = j.rem_euclid(m as i64) as usize;
            fold[r] = fold[r] + y.bins()[(j - base).rem_euclid(n) as usize] * w.conj();
        }
        fft::inverse_unnormalized_in_place(&mut fold);
        out.as_mut_slice()[k * m..(k + 1) * m].copy_from_slice(&fold);
    }
    Ok(out)
}

fn local_taps<T: Real>(w: &LocalWindow<T>, cfg: &GfdmConfig) -> Result<Vec<(i64, Complex<T>)>> {
    if w.values().len() > cfg.n() {
        return Err(Error::Shape {
            context: "local window no longer than N",
            expected: cfg.n(),
            actual: w.values().len(),
        });
    }
    let l = w.half_len() as i64;
    Ok((-l..=l).zip(w.values().iter().copied()).collect())
}

/// Whole-band frequency-domain DGT,
/// `Y_{k,m} = (1/N) sum_l Y(l) Gamma*((l+kM)_N) e^{j2pi ml/M}`.
pub fn fd_dgt_receive<T: Real>(
    y: &Spectrum<T>,
    gamma: &FreqWindow<T>,
    cfg: &GfdmConfig,
) -> Result<SymbolGrid<T>> {
    if gamma.len() != cfg.n() {
        return Err(Error::Shape {
            context: "analysis window",
            expected: cfg.n(),
            actual: gamma.len(),
        });
    }
    let scale: T = lit(1.0 / cfg.n() as f64);
    let taps: Vec<(i64, Complex<T>)> = gamma
        .support()
        .into_iter()
        .map(|(l, v)| (l as i64, v * scale))
        .collect();
    windowed_dgt(y, &taps, cfg)
}

/// FD-DGT restricted to `2L+1` bins around each subcarrier centre, using a
/// window from [`crate::windows::truncate_fullband`].
pub fn truncated_fd_dgt_receive<T: Real>(
    y: &Spectrum<T>,
    gamma_trunc: &LocalWindow<T>,
    cfg: &GfdmConfig,
) -> Result<SymbolGrid<T>> {
    windowed_dgt(y, &local_taps(gamma_trunc, cfg)?, cfg)
}

/// Local DGT with a least-squares window of `2L+1` taps.
pub fn ldgt_receive<T: Real>(y: &Spectrum<T>, w: &LocalWindow<T>, cfg: &GfdmConfig) -> Result<SymbolGrid<T>> {
    windowed_dgt(y, &local_taps(w, cfg)?, cfg)
}

/// Time-domain DGT `d_{k,m} = sum_n x(n) gamma*_{k,m}(n)` with
/// `gamma_{k,m}(n) = gamma((n - mK)_N) e^{-j2pi kn/K}`.
pub fn dgt_time<T: Real>(x: &TimeSignal<T>, gamma: &[Complex<T>], cfg: &GfdmConfig) -> Result<SymbolGrid<T>> {
    let (n, k) = (cfg.n(), cfg.k());
    if x.samples().len() != n || x.cp_len() != 0 {
        return Err(Error::Shape {
            context: "unframed time block",
            expected: n,
            actual: x.samples().len(),
        });
    }
    if gamma.len() != n {
        return Err(Error::Shape {
            context: "time-domain analysis window",
            expected: n,
            actual: gamma.len(),
        });
    }
    let xs = x.samples();
    let mut out = SymbolGrid::zeros(k, cfg.m());
    let mut fold = vec![Complex::zero(); k];
    for m in 0..cfg.m() {
        fold.iter_mut().for_each(|v| *v = Complex::zero());
        for (i, &xv) in xs.iter().enumerate() {
            let g = gamma[(i + n - m * k) % n];
            fold[i % k] = fold[i % k] + xv * g.conj();
        }
        fft::inverse_unnormalized_in_place(&mut fold);
        for (kk, v) in fold.iter().enumerate() {
            out.set(kk, m, *v);
        }
    }
    Ok(out)
}

/// Symbol-by-symbol detection `argmin_s |Y_{k,m} - H_k s|^2`; ties go to
/// the lowest alphabet index.
pub fn detect<T: Real>(soft: &SymbolGrid<T>, gains: &[Complex<T>], cfg: &GfdmConfig) -> Result<Detection<T>> {
    soft.check_shape(cfg)?;
    if gains.len() != cfg.k() {
        return Err(Error::Shape {
            context: "per-subcarrier gains",
            expected: cfg.k(),
            actual: gains.len(),
        });
    }
    let alphabet = cfg.constellation().alphabet::<T>();
    let mut flagged = 0;
    let mut symbols = SymbolGrid::zeros(cfg.k(), cfg.m());
    for (k, &h) in gains.iter().enumerate() {
        let degenerate = h.is_zero() || !h.re.is_finite() || !h.im.is_finite();
        let hyp: Vec<Complex<T>> = alphabet.iter().map(|s| h * s).collect();
        for m in 0..cfg.m() {
            if degenerate {
                flagged += 1;
            }
            let idx = nearest_index(soft.get(k, m), &hyp);
            symbols.set(k, m, alphabet[idx]);
        }
    }
    if flagged > 0 {
        log::debug!("{flagged} symbols detected on a zero channel gain");
    }
    Ok(Detection { symbols, flagged })
}

/// Dense `N x N` transmit matrix; column `k*M + m` is the unframed block
/// produced by the unit grid `e_{k,m}`.
pub fn transmit_matrix<T: Real>(g: &FreqWindow<T>, cfg: &GfdmConfig) -> Result<CMatrix<T>> {
    let n = cfg.n();
    let mut a = CMatrix::zeros(n, n);
    let mut unit = SymbolGrid::zeros(cfg.k(), cfg.m());
    for col in 0..n {
        unit.as_mut_slice()[col] = Complex::new(T::one(), T::zero());
        let x = fft::idft(idgt_freq(&unit, g, cfg)?.bins());
        unit.as_mut_slice()[col] = Complex::zero();
        for (r, v) in x.into_iter().enumerate() {
            a[(r, col)] = v;
        }
    }
    Ok(a)
}

/// Zero-forcing by dense inversion of (circulant channel) x (transmit
/// matrix). Intended for small blocks only.
pub fn zf_oracle_receive<T: Real>(
    y: &TimeSignal<T>,
    h: &ChannelRealization<T>,
    g: &FreqWindow<T>,
    cfg: &GfdmConfig,
) -> Result<SymbolGrid<T>> {
    let n = cfg.n();
    if y.samples().len() != n + cfg.cp_len() {
        return Err(Error::Shape {
            context: "framed received block (N + cp_len)",
            expected: n + cfg.cp_len(),
            actual: y.samples().len(),
        });
    }
    let mut circ = CMatrix::zeros(n, n);
    for &(d, gain) in h.taps() {
        for col in 0..n {
            let row = (col + d) % n;
            circ[(row, col)] = circ[(row, col)] + gain;
        }
    }
    let combined = circ.matmul(&transmit_matrix(g, cfg)?);
    let lu = Lu::factor(&combined).map_err(|e| match e {
        Error::Singular { condition, .. } => Error::Singular {
            context: "zero-forcing oracle (channel x transmit matrix)".into(),
            condition,
        },
        other => other,
    })?;
    SymbolGrid::from_vec(cfg.k(), cfg.m(), lu.solve(&y.samples()[cfg.cp_len()..]))
}
