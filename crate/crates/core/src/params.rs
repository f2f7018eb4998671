//! Block geometry, constellations and configuration loading.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Supported constellations. Both are Gray mapped with unit mean energy.
///
/// Bits are read most-significant first and the resulting integer is the
/// alphabet index. QPSK maps `(b0, b1)` to `((1-2b0) + j(1-2b1))/sqrt(2)`;
/// 16QAM follows the 3GPP table,
/// `I = (1-2b0)(2-(1-2b2))/sqrt(10)`, `Q = (1-2b1)(2-(1-2b3))/sqrt(10)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constellation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "QAM16")]
    Qam16,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
        }
    }

    pub fn size(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Alphabet points in index order.
    pub fn alphabet<T: Real>(self) -> Vec<Complex<T>> {
        let bit = |idx: usize, pos: usize| -> f64 {
            ((idx >> (self.bits_per_symbol() - 1 - pos)) & 1) as f64
        };
        (0..self.size())
            .map(|i| {
                let (re, im) = match self {
                    Constellation::Qpsk => {
                        let s = std::f64::consts::FRAC_1_SQRT_2;
                        ((1.0 - 2.0 * bit(i, 0)) * s, (1.0 - 2.0 * bit(i, 1)) * s)
                    }
                    Constellation::Qam16 => {
                        let s = 1.0 / 10f64.sqrt();
                        (
                            (1.0 - 2.0 * bit(i, 0)) * (2.0 - (1.0 - 2.0 * bit(i, 2))) * s,
                            (1.0 - 2.0 * bit(i, 1)) * (2.0 - (1.0 - 2.0 * bit(i, 3))) * s,
                        )
                    }
                };
                Complex::new(lit(re), lit(im))
            })
            .collect()
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constellation::Qpsk => "QPSK",
            Constellation::Qam16 => "QAM16",
        })
    }
}

impl FromStr for Constellation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "QPSK" | "4QAM" => Ok(Constellation::Qpsk),
            "QAM16" | "16QAM" => Ok(Constellation::Qam16),
            other => Err(Error::InvalidConfig(format!("unknown constellation '{other}'"))),
        }
    }
}

/// Immutable GFDM block configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GfdmConfig {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    beta: f64,
    tau: usize,
    cp_len: usize,
    constellation: Constellation,
}

impl GfdmConfig {
    /// Number of subcarriers `K`.
    pub fn k(&self) -> usize {
        self.k
    }
    /// Subsymbols per block `M`.
    pub fn m(&self) -> usize {
        self.m
    }
    /// Samples per block `N = K M`.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// Half-support of the synthesis window in frequency bins.
    pub fn tau(&self) -> usize {
        self.tau
    }
    pub fn cp_len(&self) -> usize {
        self.cp_len
    }
    pub fn constellation(&self) -> Constellation {
        self.constellation
    }
    /// Data bits carried by one block.
    pub fn bits_per_block(&self) -> usize {
        self.n * self.constellation.bits_per_symbol()
    }

    /// Same geometry with a different roll-off.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        build_config(self.k, self.m, beta, self.cp_len, self.constellation)
    }

    pub fn with_cp_len(&self, cp_len: usize) -> Result<Self> {
        build_config(self.k, self.m, self.beta, cp_len, self.constellation)
    }

    pub fn with_constellation(&self, constellation: Constellation) -> Result<Self> {
        build_config(self.k, self.m, self.beta, self.cp_len, constellation)
    }
}

/// Validates the block parameters and derives `N` and `tau`.
///
/// `tau = round(M(1+beta)/2)` for even `M` and `round((M-1)(1+beta)/2)` for
/// odd `M` (halves round away from zero), clamped to at least
/// `max(floor(M/2), 1)` and at most `N/2`.
pub fn build_config(
    k: usize,
    m: usize,
    beta: f64,
    cp_len: usize,
    constellation: Constellation,
) -> Result<GfdmConfig> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfig(format!(
            "K and M must be positive (K={k}, M={m})"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!(
            "roll-off beta must lie in [0, 1], got {beta}"
        )));
    }
    let n = k
        .checked_mul(m)
        .ok_or_else(|| Error::InvalidConfig("K*M overflows".into()))?;
    let span = if m.is_multiple_of(2) { m } else { m - 1 } as f64;
    let raw = (span * (1.0 + beta) / 2.0).round() as usize;
    let tau = raw.max(m / 2).max(1).min(n / 2);
    Ok(GfdmConfig {
        k,
        m,
        n,
        beta,
        tau,
        cp_len,
        constellation,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    beta: f64,
    cp_len: usize,
    constellation: String,
    seed: Option<u64>,
}

/// Parses a TOML config with keys `K`, `M`, `beta`, `cp_len`,
/// `constellation` and optional `seed`.
pub fn parse_config(text: &str) -> Result<(GfdmConfig, Option<u64>)> {
    let raw: ConfigFile = toml::from_str(text)?;
    let cfg = build_config(
        raw.k,
        raw.m,
        raw.beta,
        raw.cp_len,
        raw.constellation.parse()?,
    )?;
    Ok((cfg, raw.seed))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(GfdmConfig, Option<u64>)> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Renders a config in the same TOML format accepted by [`parse_config`].
pub fn config_to_toml(cfg: &GfdmConfig, seed: Option<u64>) -> String {
    let mut s = format!(
        "K = {}\nM = {}\nbeta = {:?}\ncp_len = {}\nconstellation = \"{}\"\n",
        cfg.k, cfg.m, cfg.beta, cfg.cp_len, cfg.constellation
    );
    if let Some(seed) = seed {
        s.push_str(&format!("seed = {seed}\n"));
    }
    s
}

/// A `K x M` array of complex symbols, indexed `(k, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolGrid<T> {
    k: usize,
    m: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> SymbolGrid<T> {
    pub fn zeros(k: usize, m: usize) -> Self {
        Self {
            k,
            m,
            values: vec![Complex::new(T::zero(), T::zero()); k * m],
        }
    }

    pub fn from_fn(k: usize, m: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut values = Vec::with_capacity(k * m);
        for kk in 0..k {
            for mm in 0..m {
                values.push(f(kk, mm));
            }
        }
        Self { k, m, values }
    }

    /// Wraps values stored subcarrier-major (`index = k*M + m`).
    pub fn from_vec(k: usize, m: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != k * m {
            return Err(Error::Shape {
                context: "symbol grid",
                expected: k * m,
                actual: values.len(),
            });
        }
        Ok(Self { k, m, values })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.k, self.m)
    }

    pub fn get(&self, k: usize, m: usize) -> Complex<T> {
        self.values[k * self.m + m]
    }

    pub fn set(&mut self, k: usize, m: usize, v: Complex<T>) {
        self.values[k * self.m + m] = v;
    }

    /// Values stored subcarrier-major (`index = k*M + m`).
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    /// Largest `|self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape());
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub(crate) fn check_shape(&self, cfg: &GfdmConfig) -> Result<()> {
        if self.shape() != (cfg.k, cfg.m) {
            return Err(Error::Shape {
                context: "symbol grid (K*M)",
                expected: cfg.k * cfg.m,
                actual: self.k * self.m,
            });
        }
        Ok(())
    }
}

/// Maps `K*M*log2|alphabet|` bits (each 0 or 1) onto a grid, filling
/// symbols in storage order.
pub fn map_bits<T: Real>(bits: &[u8], cfg: &GfdmConfig) -> Result<SymbolGrid<T>> {
    let bps = cfg.constellation.bits_per_symbol();
    if bits.len() != cfg.n * bps {
        return Err(Error::Shape {
            context: "bit sequence for one block",
            expected: cfg.n * bps,
            actual: bits.len(),
        });
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidConfig(format!("bit values must be 0 or 1, got {b}")));
    }
    let alphabet = cfg.constellation.alphabet::<T>();
    let values = bits
        .chunks(bps)
        .map(|c| alphabet[c.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)])
        .collect();
    SymbolGrid::from_vec(cfg.k, cfg.m, values)
}

/// Index of the alphabet point nearest to `z`; ties go to the lowest index.
pub fn nearest_index<T: Real>(z: Complex<T>, alphabet: &[Complex<T>]) -> usize {
    let mut best = 0;
    let mut best_d = (z - alphabet[0]).norm_sqr();
    for (i, s) in alphabet.iter().enumerate().skip(1) {
        let d = (z - s).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Inverse of [`map_bits`] using nearest-point decisions.
pub fn demap_symbols<T: Real>(grid: &SymbolGrid<T>, cfg: &GfdmConfig) -> Result<Vec<u8>> {
    grid.check_shape(cfg)?;
    let bps = cfg.constellation.bits_per_symbol();
    let alphabet = cfg.constellation.alphabet::<T>();
    let mut bits = Vec::with_capacity(cfg.n * bps);
    for &z in grid.as_slice() {
        let idx = nearest_index(z, &alphabet);
        bits.extend((0..bps).rev().map(|s| ((idx >> s) & 1) as u8));
    }
    Ok(bits)
}
