//! Brute-force reference computations shared by the integration tests.
//! Everything here is written directly from the defining sums and avoids
//! the library's fast paths.
#![allow(dead_code, clippy::needless_range_loop)]

use gfdm_core::prelude::*;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex<f64>;

pub fn cis(theta: f64) -> C {
    Complex::new(theta.cos(), theta.sin())
}

pub fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

pub fn modn(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

pub fn cfg(k: usize, m: usize, beta: f64) -> GfdmConfig {
    build_config(k, m, beta, 0, Constellation::Qpsk).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<C> {
    (0..n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_qpsk_grid(cfg: &GfdmConfig, rng: &mut impl Rng) -> SymbolGrid<f64> {
    let bits: Vec<u8> = (0..cfg.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
    map_bits(&bits, cfg).unwrap()
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// O(N^2) DFT.
pub fn dense_dft(x: &[C]) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|l| {
            (0..n)
                .map(|i| x[i] * cis(-two_pi() * ((l * i) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

pub fn dense_idft(x: &[C]) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|l| x[l] * cis(two_pi() * ((l * i) % n) as f64 / n as f64))
                .sum::<C>()
                / n as f64
        })
        .collect()
}

/// `X(l) = sum_{k,m} d G((l+kM)_N) e^{-j2pi lm/M}` as a plain triple sum.
pub fn brute_idgt(d: &SymbolGrid<f64>, g: &[C], cfg: &GfdmConfig) -> Vec<C> {
    let (n, kk, mm) = (cfg.n(), cfg.k(), cfg.m());
    (0..n)
        .map(|l| {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..kk {
                for m in 0..mm {
                    acc += d.get(k, m) * g[(l + k * mm) % n] * cis(-two_pi() * (l * m) as f64 / mm as f64);
                }
            }
            acc
        })
        .collect()
}

/// Time-domain synthesis `x(n) = sum d g((n-mK)_N) e^{-j2pi kn/K}`.
pub fn brute_time_synthesis(d: &SymbolGrid<f64>, g_time: &[C], cfg: &GfdmConfig) -> Vec<C> {
    let (n, kk, mm) = (cfg.n(), cfg.k(), cfg.m());
    (0..n)
        .map(|t| {
            let mut acc = C::new(0.0, 0.0);
            for k in 0..kk {
                for m in 0..mm {
                    let g = g_time[modn(t as i64 - (m * kk) as i64, n)];
                    acc += d.get(k, m) * g * cis(-two_pi() * ((k * t) % kk) as f64 / kk as f64);
                }
            }
            acc
        })
        .collect()
}

/// `Y_{k,m} = (1/N) sum_l Y(l) Gamma*((l+kM)_N) e^{j2pi ml/M}`.
pub fn brute_fd_dgt(y: &[C], gamma: &[C], cfg: &GfdmConfig) -> SymbolGrid<f64> {
    let (n, mm) = (cfg.n(), cfg.m());
    SymbolGrid::from_fn(cfg.k(), mm, |k, m| {
        (0..n)
            .map(|l| y[l] * gamma[(l + k * mm) % n].conj() * cis(two_pi() * (m * l) as f64 / mm as f64))
            .sum::<C>()
            / n as f64
    })
}

/// Local-window sum over the `2L+1` bins centred on subcarrier `k`:
/// `sum_j Y((c_k + j)_N) w_j^* e^{j2pi m (c_k + j)/M}` with `c_k = -kM`.
pub fn brute_local(y: &[C], w: &[C], cfg: &GfdmConfig) -> SymbolGrid<f64> {
    let (n, mm) = (cfg.n(), cfg.m());
    let l = (w.len() / 2) as i64;
    SymbolGrid::from_fn(cfg.k(), mm, |k, m| {
        let c = -((k * mm) as i64);
        (-l..=l)
            .map(|j| {
                let bin = modn(c + j, n);
                y[bin] * w[(j + l) as usize].conj() * cis(two_pi() * ((m * bin) % mm) as f64 / mm as f64)
            })
            .sum()
    })
}

/// Explicit interference matrix of a local window (ideal channel):
/// `A[(k,m),(k',m')] = sum_j w_j^* G((j+(k'-k)M)_N) e^{j2pi j(m-m')/M}`,
/// indexed `k*M + m`.
pub fn local_a_matrix(w: &[C], g: &[C], cfg: &GfdmConfig) -> Vec<Vec<C>> {
    let (n, kk, mm) = (cfg.n(), cfg.k(), cfg.m());
    let l = (w.len() / 2) as i64;
    let mut a = vec![vec![C::new(0.0, 0.0); n]; n];
    for k in 0..kk {
        for m in 0..mm {
            for k2 in 0..kk {
                for m2 in 0..mm {
                    let mut acc = C::new(0.0, 0.0);
                    for j in -l..=l {
                        let gv = g[modn(j + (k2 as i64 - k as i64) * mm as i64, n)];
                        let ph = cis(two_pi() * (j * (m as i64 - m2 as i64)).rem_euclid(mm as i64) as f64 / mm as f64);
                        acc += w[(j + l) as usize].conj() * gv * ph;
                    }
                    a[k * mm + m][k2 * mm + m2] = acc;
                }
            }
        }
    }
    a
}

/// `Tr{(I - A)(I - A)^H}` = squared Frobenius norm of `I - A`.
pub fn trace_error(a: &[Vec<C>]) -> f64 {
    let mut acc = 0.0;
    for (r, row) in a.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let e = if r == c { 1.0 } else { 0.0 };
            acc += (C::new(e, 0.0) - v).norm_sqr();
        }
    }
    acc
}

/// Least squares `min ||A x - b||` by modified Gram-Schmidt QR.
pub fn qr_least_squares(a: &[Vec<C>], b: &[C]) -> Vec<C> {
    let rows = a.len();
    let cols = a[0].len();
    let mut q: Vec<Vec<C>> = (0..cols).map(|c| (0..rows).map(|r| a[r][c]).collect()).collect();
    let mut r = vec![vec![C::new(0.0, 0.0); cols]; cols];
    for j in 0..cols {
        for i in 0..j {
            let proj: C = (0..rows).map(|t| q[i][t].conj() * q[j][t]).sum();
            r[i][j] = proj;
            for t in 0..rows {
                let v = q[i][t] * proj;
                q[j][t] -= v;
            }
        }
        let norm = (0..rows).map(|t| q[j][t].norm_sqr()).sum::<f64>().sqrt();
        r[j][j] = C::new(norm, 0.0);
        for t in 0..rows {
            q[j][t] /= norm;
        }
    }
    let qtb: Vec<C> = (0..cols).map(|i| (0..rows).map(|t| q[i][t].conj() * b[t]).sum()).collect();
    let mut x = vec![C::new(0.0, 0.0); cols];
    for i in (0..cols).rev() {
        let mut acc = qtb[i];
        for j in i + 1..cols {
            acc -= r[i][j] * x[j];
        }
        x[i] = acc / r[i][i];
    }
    x
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
