//! Closed-form interference and noise variances, and receiver operation
//! counts.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::Serialize;

use crate::channel::ChannelStats;
use crate::error::{Error, Result};
use crate::params::GfdmConfig;
use crate::receivers::subcarrier_center;
use crate::scalar::{complex_to_f64, to_f64, twiddle, Real};
use crate::windows::{FreqWindow, LocalWindow};

/// `R_H(l, lb) = E{(H(l) - H(c))* (H(lb) - H(c))}` with `c` the centre bin
/// of subcarrier `k`.
pub fn channel_covariance(l: i64, l_bar: i64, k: usize, stats: &ChannelStats, cfg: &GfdmConfig) -> Complex<f64> {
    let c = subcarrier_center(k, cfg) as i64;
    let u = |bin: i64| difference_vector(bin, c, stats);
    let (ul, ub) = (u(l), u(l_bar));
    let p = ul.len();
    let mut acc = Complex::new(0.0, 0.0);
    for a in 0..p {
        for b in 0..p {
            acc += ul[a].conj() * ub[b] * stats.tap_covariance(a, b);
        }
    }
    acc
}

/// `u_p(l) = e^{-j2pi l d_p / N} - e^{-j2pi c d_p / N}` per path.
fn difference_vector(bin: i64, centre: i64, stats: &ChannelStats) -> Vec<Complex<f64>> {
    let n = stats.block_len();
    stats
        .delay_samples()
        .iter()
        .map(|&d| twiddle::<f64>(bin * d as i64, n) - twiddle::<f64>(centre * d as i64, n))
        .collect()
}

/// Variance of the channel-induced interference term
/// `Omega_{k,m} = (1/N) sum_l (H(l) - H(c_k)) X(l) Gamma*_{k,m}(l)` for
/// unit-energy i.i.d. data, returned as a complex number whose imaginary
/// part is rounding residue.
///
/// The data covariance `E{X*(l) X(lb)}` is nonzero only for
/// `lb = l + pM` with `|pM| <= 2 tau`, which bounds the inner sum.
pub fn interference_variance_complex<T: Real>(
    k: usize,
    m: usize,
    g: &FreqWindow<T>,
    gamma: &FreqWindow<T>,
    stats: &ChannelStats,
    cfg: &GfdmConfig,
) -> Result<Complex<f64>> {
    let (n, kk, mm) = (cfg.n(), cfg.k(), cfg.m());
    if k >= kk || m >= mm {
        return Err(Error::IndexOutOfRange(format!("(k={k}, m={m}) outside K={kk} x M={mm}")));
    }
    for w in [g, gamma] {
        if w.len() != n {
            return Err(Error::Shape {
                context: "window spectrum",
                expected: n,
                actual: w.len(),
            });
        }
    }
    if stats.block_len() != n {
        return Err(Error::Shape {
            context: "channel statistics block length",
            expected: n,
            actual: stats.block_len(),
        });
    }
    let g64: Vec<Complex<f64>> = g.spectrum().iter().map(|&z| complex_to_f64(z)).collect();
    let gm64: Vec<Complex<f64>> = gamma.spectrum().iter().map(|&z| complex_to_f64(z)).collect();

    let reach = (2 * cfg.tau() / mm) as i64;
    let offsets: Vec<i64> = if 2 * reach as usize + 1 >= kk {
        (0..kk as i64).collect()
    } else {
        (-reach..=reach).collect()
    };

    // M * sum_kb G*((l+kb M)_N) G((l + pM + kb M)_N), periodic in l mod M.
    let data_cov: Vec<Vec<Complex<f64>>> = (0..mm)
        .map(|r| {
            offsets
                .iter()
                .map(|&p| {
                    let s: Complex<f64> = (0..kk)
                        .map(|kb| {
                            let a = r + kb * mm;
                            let b = (a as i64 + p * mm as i64).rem_euclid(n as i64) as usize;
                            g64[a % n].conj() * g64[b]
                        })
                        .sum();
                    s * mm as f64
                })
                .collect()
        })
        .collect();

    let centre = subcarrier_center(k, cfg) as i64;
    let paths = stats.delay_samples().len();
    let cov: Vec<f64> = (0..paths * paths)
        .map(|i| stats.tap_covariance(i / paths, i % paths))
        .collect();
    let u: Vec<Vec<Complex<f64>>> = (0..n as i64).map(|l| difference_vector(l, centre, stats)).collect();
    let cu: Vec<Vec<Complex<f64>>> = u
        .iter()
        .map(|ul| {
            (0..paths)
                .map(|a| (0..paths).map(|b| ul[b] * cov[a * paths + b]).sum())
                .collect()
        })
        .collect();

    let shift = k * mm;
    let mut acc = Complex::new(0.0, 0.0);
    for l in 0..n {
        let gl = gm64[(l + shift) % n];
        if gl.norm_sqr() == 0.0 {
            continue;
        }
        let gl = gl * twiddle::<f64>((l * m) as i64, mm);
        for (pi, &p) in offsets.iter().enumerate() {
            let lb = (l as i64 + p * mm as i64).rem_euclid(n as i64) as usize;
            let gb = gm64[(lb + shift) % n];
            if gb.norm_sqr() == 0.0 {
                continue;
            }
            let gb = gb * twiddle::<f64>((lb * m) as i64, mm);
            let r_h: Complex<f64> = u[l].iter().zip(&cu[lb]).map(|(a, b)| a.conj() * b).sum();
            acc += r_h * data_cov[l % mm][pi] * gl * gb.conj();
        }
    }
    Ok(acc / (n as f64 * n as f64))
}

/// Real-valued interference variance, see [`interference_variance_complex`].
pub fn interference_variance<T: Real>(
    k: usize,
    m: usize,
    g: &FreqWindow<T>,
    gamma: &FreqWindow<T>,
    stats: &ChannelStats,
    cfg: &GfdmConfig,
) -> Result<f64> {
    let v = interference_variance_complex(k, m, g, gamma, stats, cfg)?;
    debug_assert!(
        v.im.abs() <= 1e-9 * v.re.abs().max(1.0),
        "interference variance has imaginary part {}",
        v.im
    );
    Ok(v.re)
}

/// Analysis windows whose noise gain can be evaluated.
pub trait AnalysisWindow {
    /// Squared norm of the coefficient vector, including the `1/N` scale.
    fn coefficient_energy(&self) -> f64;
}

impl<T: Real> AnalysisWindow for FreqWindow<T> {
    fn coefficient_energy(&self) -> f64 {
        let n = self.len() as f64;
        self.spectrum().iter().map(|z| to_f64(z.norm_sqr())).sum::<f64>() / (n * n)
    }
}

impl<T: Real> AnalysisWindow for LocalWindow<T> {
    fn coefficient_energy(&self) -> f64 {
        to_f64(self.norm_sqr())
    }
}

/// Variance of the filtered noise term, `N sigma^2 ||w||^2`.
pub fn noise_variance<W: AnalysisWindow + ?Sized>(w: &W, sigma: f64, cfg: &GfdmConfig) -> f64 {
    cfg.n() as f64 * sigma * sigma * w.coefficient_energy()
}

/// Receiver families with an operation-count model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ReceiverClass {
    /// OFDM with one-tap equalization (reference point, not GFDM).
    Ofdm,
    /// Zero forcing by a dense `N x N` matrix-vector product.
    DenseZf,
    /// Matched filter with successive interference cancellation.
    MfSic,
    /// FFT-based matched filter or zero forcing.
    FftMfZf,
    /// Zero forcing / matched filter exploiting the sparse frequency-domain
    /// filter structure.
    SparseZfMf,
    /// Whole-band frequency-domain DGT.
    FdDgt,
    /// Local DGT.
    Ldgt,
}

impl ReceiverClass {
    pub const ALL: [ReceiverClass; 7] = [
        ReceiverClass::Ofdm,
        ReceiverClass::DenseZf,
        ReceiverClass::MfSic,
        ReceiverClass::FftMfZf,
        ReceiverClass::SparseZfMf,
        ReceiverClass::FdDgt,
        ReceiverClass::Ldgt,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ReceiverClass::Ofdm => "ofdm",
            ReceiverClass::DenseZf => "zf-dense",
            ReceiverClass::MfSic => "mf-sic",
            ReceiverClass::FftMfZf => "fft-mf-zf",
            ReceiverClass::SparseZfMf => "zf-mf-sparse",
            ReceiverClass::FdDgt => "fd-dgt",
            ReceiverClass::Ldgt => "ldgt",
        }
    }

    /// Whether this is a GFDM receiver (everything but the OFDM reference).
    pub fn is_gfdm(self) -> bool {
        self != ReceiverClass::Ofdm
    }
}

impl fmt::Display for ReceiverClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ReceiverClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ReceiverClass::ALL
            .into_iter()
            .find(|r| r.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown receiver class '{s}'")))
    }
}

/// Inputs of the operation-count model: block shape, local window half
/// length `L`, detection cost per symbol `J`, FFT-receiver iterations `I`
/// and cancellation iterations `I0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexityParams {
    pub m: usize,
    pub k: usize,
    pub l: usize,
    pub j: usize,
    pub i: usize,
    pub i0: usize,
}

/// Complex multiplications per block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub receiver: ReceiverClass,
    /// Value of the count formula; non-integer because `log2` of a
    /// non-power-of-two size is kept exact.
    pub multiplications: f64,
    pub params: ComplexityParams,
}

impl ComplexityReport {
    /// Count rounded to the nearest integer.
    pub fn count(&self) -> u64 {
        self.multiplications.round() as u64
    }
}

/// Evaluates the multiplication count of `receiver`.
pub fn complexity(receiver: ReceiverClass, params: ComplexityParams) -> Result<ComplexityReport> {
    let ComplexityParams { m, k, l, j, i, i0 } = params;
    if m == 0 || k == 0 {
        return Err(Error::InvalidConfig("complexity needs positive M and K".into()));
    }
    let (m, k, l, j, i, i0) = (m as f64, k as f64, l as f64, j as f64, i as f64, i0 as f64);
    let mk = m * k;
    let lg = f64::log2;
    let multiplications = match receiver {
        ReceiverClass::Ofdm => mk / 2.0 * lg(k) + mk + j * mk,
        ReceiverClass::DenseZf => mk * mk + mk * lg(mk) + mk + j * mk,
        ReceiverClass::MfSic => {
            mk * (1.5 * lg(mk) + 0.5 * lg(m) + i + 1.0 + i0 * (lg(m) + 1.0 + j))
        }
        ReceiverClass::FftMfZf => mk * (1.5 * lg(mk) + 0.5 * lg(m) + i + 1.0 + j),
        ReceiverClass::SparseZfMf => mk / 2.0 * (m + 3.0 * lg(k)) + mk + j * mk,
        ReceiverClass::FdDgt => mk * lg(mk) + m * k * k + 2.0 * j * mk,
        ReceiverClass::Ldgt => (mk / 2.0 + l + 1.0) * lg(mk) + k * (2.0 * l + 1.0) + 2.0 * j * mk,
    };
    Ok(ComplexityReport {
        receiver,
        multiplications,
        params,
    })
}

/// `1 - count(ours) / count(other)`.
pub fn reduction_ratio(ours: &ComplexityReport, other: &ComplexityReport) -> f64 {
    1.0 - ours.multiplications / other.multiplications
}
