//! Multipath Rayleigh block-fading channel: statistics, realizations and
//! the time-domain channel with additive noise.

use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::modem::{Spectrum, TimeSignal};
use crate::params::GfdmConfig;
use crate::scalar::{cast_complex, twiddle, Real};

/// EVA path delays in nanoseconds.
pub const EVA_DELAYS_NS: [f64; 9] = [0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0];
/// EVA path powers in dB.
pub const EVA_POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];

/// Cross-path correlation model of the tap gains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TapCorrelation {
    /// `E{h*(a) h(b)} = sqrt(P_a P_b) J0(2 pi k_D (d_a - d_b) / N)`.
    Jakes,
    /// Independent paths: `E{h*(a) h(b)} = P_a delta(a - b)`.
    Uncorrelated,
}

/// Path statistics of a multipath channel for blocks of `N` samples.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelStats {
    delays_ns: Vec<f64>,
    powers_db: Vec<f64>,
    sample_interval_ns: f64,
    doppler_kd: f64,
    block_len: usize,
    correlation: TapCorrelation,
    delay_samples: Vec<usize>,
    powers: Vec<f64>,
    #[serde(skip)]
    mixing: Vec<f64>,
}

impl ChannelStats {
    /// Builds statistics from a power-delay profile. Delays are rounded to
    /// the nearest sample and linear powers are normalized to unit total.
    pub fn new(
        delays_ns: Vec<f64>,
        powers_db: Vec<f64>,
        sample_interval_ns: f64,
        doppler_kd: f64,
        block_len: usize,
        correlation: TapCorrelation,
    ) -> Result<Self> {
        if delays_ns.is_empty() || delays_ns.len() != powers_db.len() {
            return Err(Error::InvalidConfig(format!(
                "profile needs equally many delays and powers ({} vs {})",
                delays_ns.len(),
                powers_db.len()
            )));
        }
        if !(sample_interval_ns > 0.0) || !(doppler_kd >= 0.0) || block_len == 0 {
            return Err(Error::InvalidConfig(
                "sample interval and block length must be positive, Doppler non-negative".into(),
            ));
        }
        if delays_ns.iter().any(|d| !(*d >= 0.0)) || delays_ns.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig("delays must be non-negative and sorted".into()));
        }
        if powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("path powers must be finite".into()));
        }
        let delay_samples: Vec<usize> = delays_ns
            .iter()
            .map(|d| (d / sample_interval_ns).round() as usize)
            .collect();
        let lin: Vec<f64> = powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        let powers = lin.iter().map(|p| p / total).collect();
        let mut stats = Self {
            delays_ns,
            powers_db,
            sample_interval_ns,
            doppler_kd,
            block_len,
            correlation,
            delay_samples,
            powers,
            mixing: Vec::new(),
        };
        stats.mixing = stats.mixing_matrix();
        Ok(stats)
    }

    /// One path at delay zero with unit power.
    pub fn flat(block_len: usize) -> Self {
        Self::new(vec![0.0], vec![0.0], 1.0, 0.0, block_len, TapCorrelation::Uncorrelated)
            .expect("flat profile is valid")
    }

    /// Reads a `(delay_ns, power_db)` CSV profile.
    pub fn from_profile_csv(
        path: impl AsRef<Path>,
        sample_interval_ns: f64,
        doppler_kd: f64,
        block_len: usize,
        correlation: TapCorrelation,
    ) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let (mut delays, mut powers) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("profile rows need delay_ns,power_db".into()))?
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid number in profile row {rec:?}")))
            };
            delays.push(num(0)?);
            powers.push(num(1)?);
        }
        Self::new(delays, powers, sample_interval_ns, doppler_kd, block_len, correlation)
    }

    pub fn delays_ns(&self) -> &[f64] {
        &self.delays_ns
    }
    pub fn powers_db(&self) -> &[f64] {
        &self.powers_db
    }
    pub fn sample_interval_ns(&self) -> f64 {
        self.sample_interval_ns
    }
    /// Maximum Doppler shift in bins.
    pub fn doppler_kd(&self) -> f64 {
        self.doppler_kd
    }
    pub fn block_len(&self) -> usize {
        self.block_len
    }
    pub fn correlation(&self) -> TapCorrelation {
        self.correlation
    }
    pub fn delay_samples(&self) -> &[usize] {
        &self.delay_samples
    }
    /// Normalized linear path powers.
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
    pub fn max_delay(&self) -> usize {
        self.delay_samples.iter().copied().max().unwrap_or(0)
    }

    pub fn with_correlation(&self, correlation: TapCorrelation) -> Self {
        Self::new(
            self.delays_ns.clone(),
            self.powers_db.clone(),
            self.sample_interval_ns,
            self.doppler_kd,
            self.block_len,
            correlation,
        )
        .expect("already validated")
    }

    /// `E{h*(a) h(b)}` between paths `a` and `b`.
    pub fn tap_covariance(&self, a: usize, b: usize) -> f64 {
        match self.correlation {
            TapCorrelation::Uncorrelated => {
                if a == b {
                    self.powers[a]
                } else {
                    0.0
                }
            }
            TapCorrelation::Jakes => {
                let delta = self.delay_samples[a] as f64 - self.delay_samples[b] as f64;
                (self.powers[a] * self.powers[b]).sqrt()
                    * jakes_correlation(self.doppler_kd, delta, self.block_len)
            }
        }
    }

    /// `E{H(x) H*(y)}` for frequency bins `x`, `y`, with
    /// `H(l) = sum_p h_p e^{-j2pi l d_p / N}`.
    pub fn response_correlation(&self, x: i64, y: i64) -> Complex<f64> {
        let n = self.block_len;
        let paths = self.delay_samples.len();
        let mut acc = Complex::zero();
        for a in 0..paths {
            for b in 0..paths {
                let c = self.tap_covariance(a, b);
                if c == 0.0 {
                    continue;
                }
                let da = self.delay_samples[a] as i64;
                let db = self.delay_samples[b] as i64;
                acc += twiddle::<f64>(x * da - y * db, n) * c;
            }
        }
        acc
    }

    /// Row-major factor `F` with `F F^T` equal to the tap covariance.
    fn mixing_matrix(&self) -> Vec<f64> {
        let p = self.delay_samples.len();
        let cov: Vec<f64> = (0..p * p).map(|i| self.tap_covariance(i / p, i % p)).collect();
        let (vals, vecs) = symmetric_eigen(cov, p, true);
        let vecs = vecs.expect("eigenvectors requested");
        let mut f = vec![0.0; p * p];
        for r in 0..p {
            for c in 0..p {
                f[r * p + c] = vecs[r * p + c] * vals[c].max(0.0).sqrt();
            }
        }
        f
    }
}

/// `J0(2 pi k_D delta / N)`.
pub fn jakes_correlation(doppler_kd: f64, delta_samples: f64, block_len: usize) -> f64 {
    libm::j0(2.0 * std::f64::consts::PI * doppler_kd * delta_samples / block_len as f64)
}

/// EVA statistics sampled at `sample_interval_ns`, with
/// `k_D = f_D N T_s` bins.
pub fn eva_stats(sample_interval_ns: f64, doppler_hz: f64, cfg: &GfdmConfig) -> Result<ChannelStats> {
    ChannelStats::new(
        EVA_DELAYS_NS.to_vec(),
        EVA_POWERS_DB.to_vec(),
        sample_interval_ns,
        doppler_hz * cfg.n() as f64 * sample_interval_ns * 1e-9,
        cfg.n(),
        TapCorrelation::Jakes,
    )
}

/// EVA profile with the sampling interval stretched so the longest path
/// lands on `max_delay_samples`. Used for small blocks where the real
/// sampling rate would put every path inside one sample.
pub fn eva_scaled_stats(max_delay_samples: usize, doppler_kd: f64, cfg: &GfdmConfig) -> Result<ChannelStats> {
    if max_delay_samples == 0 {
        return Err(Error::InvalidConfig("scaled EVA needs a positive delay spread".into()));
    }
    let ts = EVA_DELAYS_NS[8] / max_delay_samples as f64;
    ChannelStats::new(
        EVA_DELAYS_NS.to_vec(),
        EVA_POWERS_DB.to_vec(),
        ts,
        doppler_kd,
        cfg.n(),
        TapCorrelation::Jakes,
    )
}

/// One block-fading draw.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    taps: Vec<(usize, Complex<T>)>,
    response: Spectrum<T>,
}

impl<T: Real> ChannelRealization<T> {
    /// Builds a realization from explicit `(delay, gain)` taps.
    pub fn from_taps(taps: Vec<(usize, Complex<T>)>, block_len: usize) -> Self {
        let response = frequency_response(&taps, block_len);
        Self { taps, response }
    }

    /// Unit gain at delay zero.
    pub fn identity(block_len: usize) -> Self {
        Self::from_taps(vec![(0, Complex::new(T::one(), T::zero()))], block_len)
    }

    pub fn taps(&self) -> &[(usize, Complex<T>)] {
        &self.taps
    }

    /// `H(l)` for `l = 0..N`.
    pub fn response(&self) -> &Spectrum<T> {
        &self.response
    }

    pub fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.0).max().unwrap_or(0)
    }
}

/// `H(l) = sum taps g e^{-j 2 pi l d / N}`.
pub fn frequency_response<T: Real>(taps: &[(usize, Complex<T>)], n: usize) -> Spectrum<T> {
    Spectrum::new(
        (0..n)
            .map(|l| {
                taps.iter().fold(Complex::zero(), |acc, &(d, g)| {
                    acc + g * twiddle::<T>((l * d) as i64, n)
                })
            })
            .collect(),
    )
}

/// Draws a circular complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex<f64> {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re * s, im * s)
}

/// Draws tap gains from the statistics' covariance (quasi-static over the
/// block). Paths sharing a rounded delay are kept as separate taps.
pub fn realize_channel<T: Real, R: Rng + ?Sized>(stats: &ChannelStats, rng: &mut R) -> ChannelRealization<T> {
    let p = stats.delay_samples.len();
    let z: Vec<Complex<f64>> = (0..p).map(|_| complex_gaussian(rng, 1.0)).collect();
    let taps = (0..p)
        .map(|r| {
            let g: Complex<f64> = (0..p).map(|c| z[c] * stats.mixing[r * p + c]).sum();
            (stats.delay_samples[r], cast_complex::<T>(g))
        })
        .collect();
    ChannelRealization::from_taps(taps, stats.block_len)
}

/// Linear convolution with the taps (truncated to the frame) plus circular
/// complex Gaussian noise of per-sample variance `noise_sigma^2`.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    x: &TimeSignal<T>,
    h: &ChannelRealization<T>,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<TimeSignal<T>> {
    if h.max_delay() > x.cp_len() {
        return Err(Error::CyclicPrefixTooShort {
            cp_len: x.cp_len(),
            max_delay: h.max_delay(),
        });
    }
    let xs = x.samples();
    let mut y = vec![Complex::zero(); xs.len()];
    for &(d, g) in &h.taps {
        for n in d..xs.len() {
            y[n] = y[n] + g * xs[n - d];
        }
    }
    if noise_sigma > 0.0 {
        let var = noise_sigma * noise_sigma;
        for v in y.iter_mut() {
            *v = *v + cast_complex::<T>(complex_gaussian(rng, var));
        }
    }
    Ok(TimeSignal::new(y, x.cp_len()).with_sample_interval(x.sample_interval()))
}
