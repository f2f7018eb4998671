//! Synthesis and analysis windows: the raised-cosine prototype spectrum,
//! the full-band Wexler-Raz dual, the local biorthogonality system and the
//! least-squares local windows used by the LDGT receiver.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;

use crate::channel::ChannelStats;
use crate::error::{Error, Result};
use crate::linalg::{solve_hermitian, CMatrix, Lu, MAX_CONDITION};
use crate::params::GfdmConfig;
use crate::scalar::{cast_complex, complex_to_f64, lit, twiddle, Real};

/// Role of a length-`N` frequency window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    Synthesis,
    AnalysisFull,
}

/// A length-`N` window spectrum indexed `l = 0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqWindow<T> {
    spectrum: Vec<Complex<T>>,
    half_support: usize,
    kind: WindowKind,
}

impl<T: Real> FreqWindow<T> {
    pub fn new(spectrum: Vec<Complex<T>>, half_support: usize, kind: WindowKind) -> Self {
        Self {
            spectrum,
            half_support,
            kind,
        }
    }

    pub fn spectrum(&self) -> &[Complex<T>] {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn half_support(&self) -> usize {
        self.half_support
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    /// Value at the circular index `(l)_N`.
    pub fn at(&self, l: i64) -> Complex<T> {
        self.spectrum[l.rem_euclid(self.spectrum.len() as i64) as usize]
    }

    /// `(1/N) sum |G(l)|^2`, the time-domain energy.
    pub fn energy(&self) -> T {
        let s: T = self.spectrum.iter().map(|z| z.norm_sqr()).sum();
        s / lit(self.spectrum.len() as f64)
    }

    /// Time-domain window `IDFT(G)`.
    pub fn to_time(&self) -> Vec<Complex<T>> {
        crate::fft::idft(&self.spectrum)
    }

    /// Bins holding a nonzero value.
    pub(crate) fn support(&self) -> Vec<(usize, Complex<T>)> {
        self.spectrum
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(l, v)| (l, *v))
            .collect()
    }

    fn check_len(&self, cfg: &GfdmConfig) -> Result<()> {
        if self.spectrum.len() != cfg.n() {
            return Err(Error::Shape {
                context: "window spectrum",
                expected: cfg.n(),
                actual: self.spectrum.len(),
            });
        }
        Ok(())
    }
}

/// Local analysis window of `2L+1` taps, ordered
/// `[w(-L), ..., w(-1), w(0), ..., w(L)]` and carrying the `1/N` scale.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalWindow<T> {
    values: Vec<Complex<T>>,
    half_len: usize,
}

impl<T: Real> LocalWindow<T> {
    pub fn new(values: Vec<Complex<T>>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::Shape {
                context: "local window (odd length 2L+1)",
                expected: values.len() + 1,
                actual: values.len(),
            });
        }
        let half_len = values.len() / 2;
        Ok(Self { values, half_len })
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Half length `L`.
    pub fn half_len(&self) -> usize {
        self.half_len
    }

    /// Tap at offset `j` in `[-L, L]`.
    pub fn at(&self, j: i64) -> Complex<T> {
        self.values[(j + self.half_len as i64) as usize]
    }

    /// `sum |w_j|^2`.
    pub fn norm_sqr(&self) -> T {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Raised-cosine amplitude at frequency offset `x` for `M` subsymbols.
pub fn raised_cosine_profile(x: f64, m: usize, beta: f64) -> f64 {
    let m = m as f64;
    let flat = (1.0 - beta) * m / 2.0;
    let edge = (1.0 + beta) * m / 2.0;
    let ax = x.abs();
    if ax <= flat {
        1.0
    } else if ax >= edge {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (ax - flat) / (beta * m)).cos())
    }
}

/// Raised-cosine synthesis window with unit time-domain energy.
///
/// The profile is sampled at `x = l` for odd `M` and `x = l + 1/2` for even
/// `M`, so `beta = 0` yields exactly `M` flat bins (`[-M/2, M/2-1]` or
/// `[-(M-1)/2, (M-1)/2]`). Bins outside `[-tau, tau]` are zero.
pub fn rc_synthesis_window<T: Real>(cfg: &GfdmConfig) -> FreqWindow<T> {
    let n = cfg.n();
    let offset = if cfg.m().is_multiple_of(2) { 0.5 } else { 0.0 };
    let tau = cfg.tau() as i64;
    let lo = -((n / 2) as i64);
    let hi = lo + n as i64 - 1;
    let mut raw = vec![0.0f64; n];
    for l in lo.max(-tau)..=hi.min(tau) {
        raw[l.rem_euclid(n as i64) as usize] =
            raised_cosine_profile(l as f64 + offset, cfg.m(), cfg.beta());
    }
    let energy: f64 = raw.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let scale = 1.0 / energy.sqrt();
    let spectrum = raw
        .into_iter()
        .map(|v| Complex::new(lit(v * scale), T::zero()))
        .collect();
    FreqWindow::new(spectrum, cfg.tau(), WindowKind::Synthesis)
}

/// `G_{k,m}(l) = G((l + kM)_N) exp(-j 2 pi l m / M)`.
pub fn shift_synthesis<T: Real>(
    g: &FreqWindow<T>,
    k: usize,
    m: usize,
    cfg: &GfdmConfig,
) -> Result<Vec<Complex<T>>> {
    g.check_len(cfg)?;
    if k >= cfg.k() || m >= cfg.m() {
        return Err(Error::IndexOutOfRange(format!(
            "shift (k={k}, m={m}) outside K={} x M={}",
            cfg.k(),
            cfg.m()
        )));
    }
    let (n, mm) = (cfg.n(), cfg.m());
    Ok((0..n)
        .map(|l| g.spectrum[(l + k * mm) % n] * twiddle::<T>((l * m) as i64, mm))
        .collect())
}

/// Full-band dual analysis window `Gamma` satisfying the frequency-domain
/// Wexler-Raz identity
/// `(1/N) sum_l G((l+mM)_N) e^{j2pi kl/M} Gamma*(l) = delta(k) delta(m)`.
///
/// The `N` conditions split by residue `r = l mod M` into `M` independent
/// `K x K` systems `sum_q G(r+(q+m)M) Gamma*(r+qM) = K delta(m)`, each solved
/// by pivoted LU.
pub fn dual_window_fullband<T: Real>(g: &FreqWindow<T>, cfg: &GfdmConfig) -> Result<FreqWindow<T>> {
    g.check_len(cfg)?;
    let (n, k, m) = (cfg.n(), cfg.k(), cfg.m());
    let mut gamma = vec![Complex::zero(); n];
    let mut worst = 0.0f64;
    for r in 0..m {
        let a: Vec<Complex<T>> = (0..k).map(|q| g.spectrum[r + q * m]).collect();
        let s = CMatrix::from_fn(k, k, |row, q| a[(q + row) % k]);
        let lu = Lu::factor(&s).map_err(|_| Error::Singular {
            context: format!("full-band dual window, residue {r}"),
            condition: f64::INFINITY,
        })?;
        let cond = lu.condition_1(&s);
        worst = worst.max(cond);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Singular {
                context: format!("full-band dual window, residue {r}"),
                condition: cond,
            });
        }
        let mut rhs = vec![Complex::zero(); k];
        rhs[0] = Complex::new(lit(k as f64), T::zero());
        for (q, y) in lu.solve(&rhs).into_iter().enumerate() {
            gamma[r + q * m] = y.conj();
        }
    }
    let dual = FreqWindow::new(gamma, n / 2, WindowKind::AnalysisFull);
    let residual = wexler_raz_residual(g, &dual, cfg)?;
    let tol = if std::mem::size_of::<T>() >= 8 { 1e-9 } else { 1e-3 };
    if !(residual <= tol) {
        return Err(Error::Singular {
            context: format!("full-band dual window, biorthogonality residual {residual:e}"),
            condition: worst,
        });
    }
    Ok(dual)
}

/// Infinity-norm residual of the frequency-domain Wexler-Raz identity over
/// `k in [0, M)`, `m in [0, K)`.
pub fn wexler_raz_residual<T: Real>(
    g: &FreqWindow<T>,
    gamma: &FreqWindow<T>,
    cfg: &GfdmConfig,
) -> Result<f64> {
    g.check_len(cfg)?;
    gamma.check_len(cfg)?;
    let (n, k, m) = (cfg.n(), cfg.k(), cfg.m());
    let g64: Vec<Complex<f64>> = g.spectrum.iter().map(|&z| complex_to_f64(z)).collect();
    let gm64: Vec<Complex<f64>> = gamma.spectrum.iter().map(|&z| complex_to_f64(z)).collect();
    let mut worst = 0.0f64;
    for shift in 0..k {
        let folded: Vec<Complex<f64>> = (0..m)
            .map(|r| {
                (0..k)
                    .map(|q| g64[(r + (q + shift) * m) % n] * gm64[r + q * m].conj())
                    .sum()
            })
            .collect();
        for kk in 0..m {
            let v: Complex<f64> = folded
                .iter()
                .enumerate()
                .map(|(r, c)| c * twiddle::<f64>(-((kk * r) as i64), m))
                .sum::<Complex<f64>>()
                / n as f64;
            let target = if kk == 0 && shift == 0 { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    Ok(worst)
}

/// Local biorthogonality system for an analysis window of `2L+1` taps.
///
/// Row `k + b M` of `B` holds `G((l + mu M)_N) e^{j 2 pi k l / M}` for tap
/// `l in [-L, L]`, where block `b` corresponds to the subcarrier offset
/// `mu in [-alpha+1, alpha-1]`. When `2 alpha - 1 > K` the offsets alias
/// modulo `K` and only the `K` distinct blocks are kept.
#[derive(Clone, Debug)]
pub struct LocalSystem<T> {
    b: CMatrix<T>,
    alpha: usize,
    offsets: Vec<i64>,
    g0: Vec<Complex<T>>,
    half_len: usize,
    m: usize,
}

impl<T: Real> LocalSystem<T> {
    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Subcarrier offset of each row block.
    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// `[G(N-L), ..., G(0), ..., G(L)]`.
    pub fn g0(&self) -> &[Complex<T>] {
        &self.g0
    }

    pub fn half_len(&self) -> usize {
        self.half_len
    }

    /// `B^T B*`.
    pub fn gram(&self) -> CMatrix<T> {
        let cols = self.b.cols();
        let mut out = CMatrix::zeros(cols, cols);
        for r in 0..self.b.rows() {
            let row = self.b.row(r);
            for a in 0..cols {
                if row[a].is_zero() {
                    continue;
                }
                for c in 0..cols {
                    out[(a, c)] = out[(a, c)] + row[a] * row[c].conj();
                }
            }
        }
        out
    }

    /// `Phi_s = diag(exp(-j 2 pi s l / M))` for `l in [-L, L]`.
    pub fn phase_ramp(&self, shift: usize) -> Vec<Complex<T>> {
        let l = self.half_len as i64;
        (-l..=l)
            .map(|j| twiddle::<T>(shift as i64 * j, self.m))
            .collect()
    }

    /// Squared biorthogonality residual `||e - B Phi_s^* w^*||^2` for the
    /// window shifted by `s` subsymbols. The target `e` is the unit vector
    /// on the row that the shift maps onto the `(0, 0)` condition.
    pub fn ls_residual(&self, w: &LocalWindow<T>, shift: usize) -> Result<f64> {
        if w.values().len() != self.b.cols() {
            return Err(Error::Shape {
                context: "local window against local system",
                expected: self.b.cols(),
                actual: w.values().len(),
            });
        }
        let ramp = self.phase_ramp(shift);
        let x: Vec<Complex<T>> = w
            .values()
            .iter()
            .zip(&ramp)
            .map(|(v, p)| v.conj() * p.conj())
            .collect();
        let bx = self.b.mul_vec(&x);
        let target = (self.m - shift % self.m) % self.m;
        Ok(bx
            .iter()
            .enumerate()
            .map(|(r, v)| {
                let e = if r == target { 1.0 } else { 0.0 };
                (complex_to_f64(*v) - e).norm_sqr()
            })
            .sum())
    }
}

/// Builds `B` and `G~_0` for half length `L`.
pub fn build_local_system<T: Real>(
    g: &FreqWindow<T>,
    half_len: usize,
    cfg: &GfdmConfig,
) -> Result<LocalSystem<T>> {
    g.check_len(cfg)?;
    let (n, k, m) = (cfg.n(), cfg.k(), cfg.m());
    if 2 * half_len + 1 > n {
        return Err(Error::InvalidConfig(format!(
            "local window length 2L+1 = {} exceeds N = {n}",
            2 * half_len + 1
        )));
    }
    if half_len < cfg.tau() {
        log::warn!(
            "local window half length L={half_len} is shorter than the synthesis support tau={}",
            cfg.tau()
        );
    }
    let alpha = (half_len + cfg.tau() + 1).div_ceil(m);
    let blocks = 2 * alpha - 1;
    let offsets: Vec<i64> = if blocks <= k {
        (0..blocks as i64)
            .map(|b| if b < alpha as i64 { b } else { b - blocks as i64 })
            .collect()
    } else {
        (0..k as i64).collect()
    };
    let l = half_len as i64;
    let cols = 2 * half_len + 1;
    let mut b = CMatrix::zeros(offsets.len() * m, cols);
    for (blk, &mu) in offsets.iter().enumerate() {
        for (c, j) in (-l..=l).enumerate() {
            let gv = g.at(j + mu * m as i64);
            if gv.is_zero() {
                continue;
            }
            for kk in 0..m {
                b[(kk + blk * m, c)] = gv * twiddle::<T>(-(kk as i64) * j, m);
            }
        }
    }
    let g0 = (-l..=l).map(|j| g.at(j)).collect();
    Ok(LocalSystem {
        b,
        alpha,
        offsets,
        g0,
        half_len,
        m,
    })
}

/// Least-squares local window for an ideal channel,
/// `(B^T B*)^{-1} G~_0`.
pub fn ldgt_window_ideal<T: Real>(sys: &LocalSystem<T>) -> Result<LocalWindow<T>> {
    let (w, _) = solve_hermitian(&sys.gram(), &sys.g0, "local window Gram B^T B*")?;
    LocalWindow::new(w)
}

/// Channel-statistics local window designed for the reference subcarrier
/// `k = 0`. See [`ldgt_window_stat_for_subcarrier`].
pub fn ldgt_window_stat<T: Real>(
    sys: &LocalSystem<T>,
    stats: &ChannelStats,
    cfg: &GfdmConfig,
) -> Result<LocalWindow<T>> {
    ldgt_window_stat_for_subcarrier(sys, stats, cfg, 0)
}

/// Local window minimizing the expected squared error against
/// `H(c_k) d_{k,m}` over the channel statistics, where `c_k = (-kM)_N` is
/// the centre bin of subcarrier `k`:
/// `Q w = c` with `Q[a][b] = (B^T B*)[a][b] E{H(c_k+a) H*(c_k+b)}` and
/// `c[a] = G~_0[a] E{H(c_k+a) H*(c_k)}`.
pub fn ldgt_window_stat_for_subcarrier<T: Real>(
    sys: &LocalSystem<T>,
    stats: &ChannelStats,
    cfg: &GfdmConfig,
    k: usize,
) -> Result<LocalWindow<T>> {
    if k >= cfg.k() {
        return Err(Error::IndexOutOfRange(format!("subcarrier {k} >= K={}", cfg.k())));
    }
    if stats.block_len() != cfg.n() {
        return Err(Error::Shape {
            context: "channel statistics block length",
            expected: cfg.n(),
            actual: stats.block_len(),
        });
    }
    let n = cfg.n() as i64;
    let centre = crate::receivers::subcarrier_center(k, cfg) as i64;
    let l = sys.half_len as i64;
    let bins: Vec<i64> = (-l..=l).map(|j| (centre + j).rem_euclid(n)).collect();
    let gram = sys.gram();
    let cols = bins.len();
    let q = CMatrix::from_fn(cols, cols, |a, b| {
        gram[(a, b)] * cast_complex::<T>(stats.response_correlation(bins[a], bins[b]))
    });
    let rhs: Vec<Complex<T>> = (0..cols)
        .map(|a| sys.g0[a] * cast_complex::<T>(stats.response_correlation(bins[a], centre)))
        .collect();
    let (w, _) = solve_hermitian(&q, &rhs, "channel-statistics local window")?;
    LocalWindow::new(w)
}

/// Keeps `Gamma((j)_N) / N` for `j in [-L, L]`.
pub fn truncate_fullband<T: Real>(gamma: &FreqWindow<T>, half_len: usize) -> Result<LocalWindow<T>> {
    let n = gamma.len();
    if 2 * half_len + 1 > n {
        return Err(Error::InvalidConfig(format!(
            "truncation length 2L+1 = {} exceeds N = {n}",
            2 * half_len + 1
        )));
    }
    let scale: T = lit(1.0 / n as f64);
    let l = half_len as i64;
    LocalWindow::new((-l..=l).map(|j| gamma.at(j) * scale).collect())
}

/// Writes `(index, re, im)` rows with 17 significant digits.
pub fn write_indexed_csv<T: Real, W: Write>(
    writer: W,
    index_name: &str,
    rows: impl IntoIterator<Item = (i64, Complex<T>)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([index_name, "re", "im"])?;
    for (i, z) in rows {
        w.write_record([i.to_string(), format!("{:.16e}", z.re), format!("{:.16e}", z.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_indexed_csv`].
pub fn read_indexed_csv<T: Real, R: Read>(reader: R) -> Result<Vec<(i64, Complex<T>)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let parse = |s: &str| -> Result<T> {
        s.trim()
            .parse::<T>()
            .map_err(|_| Error::Parse(format!("invalid number '{s}'")))
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("expected 3 columns, found {}", rec.len())));
        }
        let idx = rec[0]
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("invalid index '{}'", &rec[0])))?;
        out.push((idx, Complex::new(parse(&rec[1])?, parse(&rec[2])?)));
    }
    Ok(out)
}

pub fn write_freq_window_csv<T: Real>(path: impl AsRef<Path>, w: &FreqWindow<T>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_indexed_csv(f, "index", w.spectrum.iter().enumerate().map(|(i, z)| (i as i64, *z)))
}

/// Reads a length-`N` window; indices must be `0..N` in order.
pub fn read_freq_window_csv<T: Real>(
    path: impl AsRef<Path>,
    half_support: usize,
    kind: WindowKind,
) -> Result<FreqWindow<T>> {
    let rows = read_indexed_csv::<T, _>(std::fs::File::open(path)?)?;
    for (pos, (i, _)) in rows.iter().enumerate() {
        if *i != pos as i64 {
            return Err(Error::Parse(format!("window index {i} at row {pos}")));
        }
    }
    Ok(FreqWindow::new(
        rows.into_iter().map(|(_, z)| z).collect(),
        half_support,
        kind,
    ))
}

/// Writes a local window with indices `-L..=L`.
pub fn write_local_window_csv<T: Real>(path: impl AsRef<Path>, w: &LocalWindow<T>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let l = w.half_len as i64;
    write_indexed_csv(f, "index", (-l..=l).zip(w.values.iter().copied()))
}

pub fn read_local_window_csv<T: Real>(path: impl AsRef<Path>) -> Result<LocalWindow<T>> {
    let rows = read_indexed_csv::<T, _>(std::fs::File::open(path)?)?;
    let l = (rows.len() / 2) as i64;
    for (pos, (i, _)) in rows.iter().enumerate() {
        if *i != pos as i64 - l {
            return Err(Error::Parse(format!("local window index {i} at row {pos}")));
        }
    }
    LocalWindow::new(rows.into_iter().map(|(_, z)| z).collect())
}

/// Largest `|a - b|` between two equally long complex slices, in `f64`.
#[cfg(test)]
fn max_abs_diff<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max(crate::scalar::to_f64((x - y).norm())))
}
