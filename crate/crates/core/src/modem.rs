//! GFDM transmitter and the receive front-end.

use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fft;
use crate::params::{GfdmConfig, SymbolGrid};
use crate::scalar::Real;
use crate::windows::{read_indexed_csv, write_indexed_csv, FreqWindow};

/// Sampling interval used when none is given (seconds).
pub const DEFAULT_SAMPLE_INTERVAL_S: f64 = 37.2e-9;

/// Complex baseband samples: one block of `N` samples, or `N + cp_len`
/// when framed with a cyclic prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal<T> {
    samples: Vec<Complex<T>>,
    cp_len: usize,
    sample_interval: f64,
}

impl<T: Real> TimeSignal<T> {
    pub fn new(samples: Vec<Complex<T>>, cp_len: usize) -> Self {
        Self {
            samples,
            cp_len,
            sample_interval: DEFAULT_SAMPLE_INTERVAL_S,
        }
    }

    pub fn with_sample_interval(mut self, seconds: f64) -> Self {
        self.sample_interval = seconds;
        self
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// The block without its prefix.
    pub fn block(&self) -> &[Complex<T>] {
        &self.samples[self.cp_len.min(self.samples.len())..]
    }

    pub fn energy(&self) -> T {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        write_indexed_csv(
            f,
            "n",
            self.samples.iter().enumerate().map(|(i, z)| (i as i64, *z)),
        )
    }

    /// Reads `(n, re, im)` rows; the caller states how many leading samples
    /// are cyclic prefix.
    pub fn read_csv(path: impl AsRef<Path>, cp_len: usize) -> Result<Self> {
        let rows = read_indexed_csv::<T, _>(std::fs::File::open(path)?)?;
        for (pos, (i, _)) in rows.iter().enumerate() {
            if *i != pos as i64 {
                return Err(Error::Parse(format!("sample index {i} at row {pos}")));
            }
        }
        Ok(Self::new(rows.into_iter().map(|(_, z)| z).collect(), cp_len))
    }
}

/// Length-`N` frequency-domain block.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    bins: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(bins: Vec<Complex<T>>) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[Complex<T>] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn into_bins(self) -> Vec<Complex<T>> {
        self.bins
    }

    pub(crate) fn check_len(&self, cfg: &GfdmConfig) -> Result<()> {
        if self.bins.len() != cfg.n() {
            return Err(Error::Shape {
                context: "spectrum",
                expected: cfg.n(),
                actual: self.bins.len(),
            });
        }
        Ok(())
    }
}

/// Frequency-domain IDGT:
/// `X(l) = sum_{k,m} d_{k,m} G((l+kM)_N) e^{-j2pi lm/M}`.
///
/// For each subcarrier the sum over `m` is an `M`-point DFT of the column
/// `d_{k,.}`, so `X((j - kM)_N) += G(j) D_k(j mod M)` over the window support.
pub fn idgt_freq<T: Real>(
    d: &SymbolGrid<T>,
    g: &FreqWindow<T>,
    cfg: &GfdmConfig,
) -> Result<Spectrum<T>> {
    d.check_shape(cfg)?;
    if g.len() != cfg.n() {
        return Err(Error::Shape {
            context: "synthesis window",
            expected: cfg.n(),
            actual: g.len(),
        });
    }
    let (n, m) = (cfg.n(), cfg.m());
    let support = g.support();
    let mut x = vec![Complex::zero(); n];
    let mut col = vec![Complex::zero(); m];
    for k in 0..cfg.k() {
        col.copy_from_slice(&d.as_slice()[k * m..(k + 1) * m]);
        fft::forward_in_place(&mut col);
        let shift = n - (k * m) % n;
        for &(j, gv) in &support {
            let bin = (j + shift) % n;
            x[bin] = x[bin] + gv * col[j % m];
        }
    }
    Ok(Spectrum::new(x))
}

/// Time-domain GFDM block with a cyclic prefix of `cp_len` samples.
pub fn modulate<T: Real>(
    d: &SymbolGrid<T>,
    g: &FreqWindow<T>,
    cfg: &GfdmConfig,
) -> Result<TimeSignal<T>> {
    let x = fft::idft(idgt_freq(d, g, cfg)?.bins());
    Ok(add_cyclic_prefix(&x, cfg.cp_len()))
}

/// Prepends the last `cp_len` samples of `block`.
pub fn add_cyclic_prefix<T: Real>(block: &[Complex<T>], cp_len: usize) -> TimeSignal<T> {
    let n = block.len() as i64;
    let mut samples = Vec::with_capacity(block.len() + cp_len);
    if n > 0 {
        samples.extend((0..cp_len as i64).map(|i| block[(i - cp_len as i64).rem_euclid(n) as usize]));
    }
    samples.extend_from_slice(block);
    TimeSignal::new(samples, cp_len)
}

/// Drops the cyclic prefix and returns the `N`-point DFT.
pub fn strip_and_transform<T: Real>(y: &TimeSignal<T>, cfg: &GfdmConfig) -> Result<Spectrum<T>> {
    let expected = cfg.n() + cfg.cp_len();
    if y.samples.len() != expected {
        return Err(Error::Shape {
            context: "framed received block (N + cp_len)",
            expected,
            actual: y.samples.len(),
        });
    }
    Ok(Spectrum::new(fft::dft(&y.samples[cfg.cp_len()..])))
}
