//! GFDM modem toolkit built on the discrete Gabor transform (DGT).
//!
//! A block of `N = K M` samples carries `K` subcarriers by `M` subsymbols,
//! each shaped by circular time/frequency shifts of one prototype filter.
//! The crate provides
//!
//! - [`params`]: block geometry, constellations and config files;
//! - [`windows`]: the raised-cosine synthesis window, its full-band
//!   Wexler-Raz dual, and least-squares local analysis windows;
//! - [`modem`]: the frequency-domain IDGT transmitter and receive front-end;
//! - [`channel`]: block Rayleigh fading with an EVA profile;
//! - [`receivers`]: time-domain DGT, FD-DGT, truncated FD-DGT, local DGT and
//!   a dense zero-forcing oracle;
//! - [`analysis`]: closed-form interference/noise variances and operation
//!   counts;
//! - [`harness`]: seeded Monte-Carlo BER and error sweeps.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar type.
//!
//! ```
//! use gfdm_core::prelude::*;
//!
//! let cfg = build_config(16, 5, 0.5, 4, Constellation::Qpsk).unwrap();
//! let g = rc_synthesis_window::<f64>(&cfg);
//! let gamma = dual_window_fullband(&g, &cfg).unwrap();
//! let bits: Vec<u8> = (0..cfg.bits_per_block()).map(|i| (i % 3 == 0) as u8).collect();
//! let d = map_bits::<f64>(&bits, &cfg).unwrap();
//! let x = modulate(&d, &g, &cfg).unwrap();
//! let y = strip_and_transform(&x, &cfg).unwrap();
//! let est = fd_dgt_receive(&y, &gamma, &cfg).unwrap();
//! assert!(est.max_abs_diff(&d) < 1e-9);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod analysis;
pub mod channel;
mod error;
pub mod fft;
pub mod harness;
pub mod linalg;
pub mod modem;
pub mod params;
pub mod receivers;
mod scalar;
pub mod windows;

pub use error::{Error, Result};
pub use scalar::Real;

pub type FreqWindow64 = windows::FreqWindow<f64>;
pub type FreqWindow32 = windows::FreqWindow<f32>;
pub type LocalWindow64 = windows::LocalWindow<f64>;
pub type LocalWindow32 = windows::LocalWindow<f32>;
pub type LocalSystem64 = windows::LocalSystem<f64>;
pub type LocalSystem32 = windows::LocalSystem<f32>;
pub type SymbolGrid64 = params::SymbolGrid<f64>;
pub type SymbolGrid32 = params::SymbolGrid<f32>;
pub type TimeSignal64 = modem::TimeSignal<f64>;
pub type TimeSignal32 = modem::TimeSignal<f32>;
pub type Spectrum64 = modem::Spectrum<f64>;
pub type Spectrum32 = modem::Spectrum<f32>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type CMatrix32 = linalg::CMatrix<f32>;

/// Common imports.
pub mod prelude {
    pub use crate::analysis::{
        channel_covariance, complexity, interference_variance, noise_variance, reduction_ratio,
        ComplexityParams, ComplexityReport, ReceiverClass,
    };
    pub use crate::channel::{
        apply_channel, eva_scaled_stats, eva_stats, realize_channel, ChannelRealization, ChannelStats,
        TapCorrelation,
    };
    pub use crate::harness::{run_ber, BerCurve, ChannelSpec, PreparedReceiver, ReceiverSpec};
    pub use crate::modem::{idgt_freq, modulate, strip_and_transform, Spectrum, TimeSignal};
    pub use crate::params::{build_config, demap_symbols, map_bits, Constellation, GfdmConfig, SymbolGrid};
    pub use crate::receivers::{
        detect, dgt_time, fd_dgt_receive, ldgt_receive, subcarrier_center, subcarrier_gains,
        truncated_fd_dgt_receive, zf_oracle_receive, ReceiverOutput,
    };
    pub use crate::windows::{
        build_local_system, dual_window_fullband, ldgt_window_ideal, ldgt_window_stat, rc_synthesis_window,
        shift_synthesis, truncate_fullband, FreqWindow, LocalSystem, LocalWindow, WindowKind,
    };
    pub use crate::{Error, Real, Result};
}
