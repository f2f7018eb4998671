//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p gfdm-core --test acceptance -- --nocapture` to
//! see the report lines.

mod common;

use std::time::Instant;

use common::*;
use gfdm_core::analysis::{complexity, interference_variance_complex, reduction_ratio, ComplexityParams};
use gfdm_core::harness::{paired_symbol_mse, run_ber_with, BerOptions};
use gfdm_core::prelude::*;
use gfdm_core::windows::wexler_raz_residual;

fn report(id: &str, pass: bool, detail: String) {
    println!("criterion {id}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_biorthogonality() {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for beta in [0.1, 0.9] {
        let c = cfg(256, 7, beta);
        let g = rc_synthesis_window::<f64>(&c);
        let t = Instant::now();
        let gamma = dual_window_fullband(&g, &c).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        worst = worst.max(wexler_raz_residual(&g, &gamma, &c).unwrap());
    }
    report(
        "1",
        worst <= 1e-9 && slowest <= 60.0,
        format!("max residual {worst:.3e} (limit 1e-9), slowest window {slowest:.3}s (limit 60s)"),
    );
}

#[test]
fn criterion_02_perfect_reconstruction() {
    let c = build_config(256, 7, 0.5, 0, Constellation::Qpsk).unwrap();
    let g = rc_synthesis_window::<f64>(&c);
    let gamma = dual_window_fullband(&g, &c).unwrap();
    let gamma_t = gamma.to_time();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = random_qpsk_grid(&c, &mut r);
        let x = modulate(&d, &g, &c).unwrap();
        let fd = fd_dgt_receive(&strip_and_transform(&x, &c).unwrap(), &gamma, &c).unwrap();
        let td = dgt_time(&x, &gamma_t, &c).unwrap();
        worst = worst.max(fd.max_abs_diff(&d)).max(td.max_abs_diff(&d));
    }
    report("2", worst <= 1e-8, format!("max |error| {worst:.3e} over 100 blocks (limit 1e-8)"));
}

#[test]
fn criterion_03_rectangular_collapse() {
    let mut worst_out = 0.0f64;
    let mut worst_win = 0.0f64;
    for (k, m) in [(16usize, 7usize), (16, 4)] {
        let c = cfg(k, m, 0.0);
        let n = c.n();
        let g = rc_synthesis_window::<f64>(&c);
        let gamma = dual_window_fullband(&g, &c).unwrap();
        worst_win = worst_win.max(max_diff(gamma.spectrum(), g.spectrum()));
        let band: Vec<i64> = (-(n as i64) / 2..(n as i64 + 1) / 2)
            .filter(|&j| g.at(j).norm() > 0.0)
            .collect();
        assert_eq!(band.len(), m);
        let mut r = rng(3);
        let y = random_vec(n, &mut r);
        let out = fd_dgt_receive(&Spectrum::new(y.clone()), &gamma, &c).unwrap();
        for kk in 0..k {
            for mm in 0..m {
                // Per-subcarrier M-point inverse DFT over the rectangular band.
                let v: C = band
                    .iter()
                    .map(|&j| y[modn(j - (kk * m) as i64, n)] * cis(two_pi() * (mm as i64 * j) as f64 / m as f64))
                    .sum::<C>()
                    * g.at(0).conj()
                    / n as f64;
                worst_out = worst_out.max((out.get(kk, mm) - v).norm());
            }
        }
    }
    report(
        "3",
        worst_out <= 1e-10 && worst_win <= 1e-10,
        format!("output diff {worst_out:.3e}, |Gamma - G| {worst_win:.3e} (limit 1e-10)"),
    );
}

#[test]
fn criterion_04_gram_shift_invariance() {
    let c = cfg(256, 7, 0.9);
    assert_eq!(c.tau(), 6);
    let g = rc_synthesis_window::<f64>(&c);
    let mut worst = 0.0f64;
    for l in [3usize, 9, 20] {
        let sys = build_local_system(&g, l, &c).unwrap();
        let gram = sys.gram();
        for s in 0..7 {
            let phi = sys.phase_ramp(s);
            let n = gram.rows();
            for a in 0..n {
                for b in 0..n {
                    let v = phi[a].conj() * gram[(a, b)] * phi[b];
                    worst = worst.max((v - gram[(a, b)]).norm());
                }
            }
        }
    }
    report("4", worst <= 1e-10, format!("max deviation {worst:.3e} over L in {{3, 9, 20}} (limit 1e-10)"));
}

#[test]
fn criterion_05_least_squares_dominance() {
    let mut pass = true;
    let mut lines = Vec::new();
    for beta in [0.3, 0.9] {
        let c = cfg(8, 4, beta);
        let g = rc_synthesis_window::<f64>(&c);
        let gamma = dual_window_fullband(&g, &c).unwrap();
        let tau = c.tau();
        let mut any_strict = false;
        for l in [tau, tau + 2, tau + 4] {
            let opt = ldgt_window_ideal(&build_local_system(&g, l, &c).unwrap()).unwrap();
            let trunc = truncate_fullband(&gamma, l).unwrap();
            let e_opt = trace_error(&local_a_matrix(opt.values(), g.spectrum(), &c));
            let e_tr = trace_error(&local_a_matrix(trunc.values(), g.spectrum(), &c));
            pass &= e_opt <= e_tr * (1.0 + 1e-12);
            any_strict |= e_opt < e_tr * (1.0 - 1e-9);
            lines.push(format!("b={beta} L={l}: {e_opt:.4e} vs {e_tr:.4e}"));
        }
        if beta == 0.9 {
            pass &= any_strict;
        }
    }
    report("5", pass, lines.join("; "));
}

#[test]
fn criterion_06_single_path_statistics_window() {
    let c = cfg(64, 7, 0.9);
    let g = rc_synthesis_window::<f64>(&c);
    let stats = ChannelStats::new(vec![0.0], vec![0.0], 1.0, 0.0, c.n(), TapCorrelation::Jakes).unwrap();
    let mut worst = 0.0f64;
    for l in [6usize, 9, 20] {
        let sys = build_local_system(&g, l, &c).unwrap();
        let a = ldgt_window_ideal(&sys).unwrap();
        let b = ldgt_window_stat(&sys, &stats, &c).unwrap();
        worst = worst.max(max_diff(a.values(), b.values()));
    }
    report("6", worst <= 1e-10, format!("max diff {worst:.3e} (limit 1e-10)"));
}

#[test]
fn criterion_07_variance_formulas() {
    let c = build_config(8, 4, 0.9, 4, Constellation::Qpsk).unwrap();
    let g = rc_synthesis_window::<f64>(&c);
    let gamma = dual_window_fullband(&g, &c).unwrap();
    let stats = eva_scaled_stats(4, 0.1, &c).unwrap();
    let cells = [(0usize, 0usize), (3, 1), (6, 3)];
    let blocks = 100_000;
    let sigma = 0.5;
    let mut r = rng(7);
    let mut omega: Vec<Vec<f64>> = vec![Vec::with_capacity(blocks); cells.len()];
    let mut noise: Vec<Vec<f64>> = vec![Vec::with_capacity(blocks); cells.len()];
    let zero = TimeSignal::new(vec![C::new(0.0, 0.0); c.n() + c.cp_len()], c.cp_len());
    let ideal = ChannelRealization::identity(c.n());
    for _ in 0..blocks {
        let d = random_qpsk_grid(&c, &mut r);
        let x = modulate(&d, &g, &c).unwrap();
        let h = realize_channel::<f64, _>(&stats, &mut r);
        let y = apply_channel(&x, &h, 0.0, &mut r).unwrap();
        let out = fd_dgt_receive(&strip_and_transform(&y, &c).unwrap(), &gamma, &c).unwrap();
        let gains = subcarrier_gains(h.response(), &c);
        let w = apply_channel(&zero, &ideal, sigma, &mut r).unwrap();
        let nout = fd_dgt_receive(&strip_and_transform(&w, &c).unwrap(), &gamma, &c).unwrap();
        for (i, &(k, m)) in cells.iter().enumerate() {
            omega[i].push((out.get(k, m) - gains[k] * d.get(k, m)).norm_sqr());
            noise[i].push(nout.get(k, m).norm_sqr());
        }
    }
    let mut pass = true;
    let mut lines = Vec::new();
    let want_noise = noise_variance(&gamma, sigma, &c);
    for (i, &(k, m)) in cells.iter().enumerate() {
        let want = interference_variance_complex(k, m, &g, &gamma, &stats, &c).unwrap().re;
        let (mo, so) = mean_and_se(&omega[i]);
        let (mn, sn) = mean_and_se(&noise[i]);
        pass &= (mo - want).abs() <= 3.0 * so && (mn - want_noise).abs() <= 3.0 * sn;
        lines.push(format!(
            "({k},{m}) omega {mo:.4e}/{want:.4e} ({:.1} se), noise {mn:.4e}/{want_noise:.4e} ({:.1} se)",
            (mo - want).abs() / so,
            (mn - want_noise).abs() / sn
        ));
    }
    let flat = interference_variance(1, 2, &g, &gamma, &ChannelStats::flat(c.n()), &c).unwrap();
    pass &= flat.abs() <= 1e-12;
    lines.push(format!("flat {flat:.1e}"));
    report("7", pass, lines.join("; "));
}

fn complexity_ratios(j: usize, i0: usize, l: usize) -> Vec<(ReceiverClass, f64)> {
    let p = ComplexityParams { m: 7, k: 256, l, j, i: 2, i0 };
    let ldgt = complexity(ReceiverClass::Ldgt, p).unwrap();
    [ReceiverClass::DenseZf, ReceiverClass::MfSic, ReceiverClass::SparseZfMf, ReceiverClass::FftMfZf, ReceiverClass::FdDgt]
        .into_iter()
        .map(|rx| (rx, 100.0 * reduction_ratio(&ldgt, &complexity(rx, p).unwrap())))
        .collect()
}

/// Checks the four `L = 9` ratios against 99.6, 66.5, 50.4 and 60.3 percent
/// and the `L = 20` FD-DGT ratio against 85.5 percent.
fn check_ratios(l9: &[(ReceiverClass, f64)], l20: &[(ReceiverClass, f64)]) -> (bool, String) {
    let targets = [99.6, 66.5, 50.4, 60.3];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((rx, got), want) in l9.iter().zip(targets) {
        pass &= (got - want).abs() <= 0.3;
        parts.push(format!("{rx} {got:.2}% (want {want}%)"));
    }
    let fd = l20.iter().find(|(rx, _)| *rx == ReceiverClass::FdDgt).unwrap().1;
    pass &= (fd - 85.5).abs() <= 0.3;
    parts.push(format!("fd-dgt L=20 {fd:.2}% (want 85.5%)"));
    (pass, parts.join(", "))
}

#[test]
fn criterion_08_complexity_ratios() {
    // Crossover: LDGT is the cheapest GFDM receiver exactly when M > 4.
    let mut crossover = true;
    for m in 1..=21 {
        let p = ComplexityParams { m, k: 256, l: 12, j: 4, i: 2, i0: 8 };
        let ldgt = complexity(ReceiverClass::Ldgt, p).unwrap().multiplications;
        let lowest = ReceiverClass::ALL
            .into_iter()
            .filter(|rx| rx.is_gfdm() && *rx != ReceiverClass::Ldgt)
            .all(|rx| complexity(rx, p).unwrap().multiplications > ldgt);
        crossover &= lowest == (m > 4);
    }
    println!(
        "criterion 8 (crossover, K=256 L=12 J=4 I0=8): {} | LDGT lowest iff M > 4 over M in 1..=21",
        if crossover { "PASS" } else { "FAIL" }
    );

    // Published conditions: detection cost excluded (J = 0), single SIC
    // iteration for the L=9 rows; 16QAM alphabet for the L=20 row.
    let (ref_pass, ref_detail) = check_ratios(&complexity_ratios(0, 1, 9), &complexity_ratios(16, 8, 20));
    println!(
        "criterion 8 (J=0 I0=1 for L=9, J=16 for L=20): {} | {ref_detail}",
        if ref_pass { "PASS" } else { "FAIL" }
    );

    // As stated: J=4, I0=8 throughout.
    let (pass, detail) = check_ratios(&complexity_ratios(4, 8, 9), &complexity_ratios(4, 8, 20));
    report("8", pass && crossover, format!("J=4 I0=8: {detail}"));
}

/// SNR (dB) where `Q(sqrt(snr))` crosses `target`, by bisection.
fn theory_snr_at(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 20.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if q_function(10f64.powf(mid / 10.0).sqrt()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_09_awgn_ber() {
    let c = build_config(256, 7, 0.1, 0, Constellation::Qpsk).unwrap();
    let snrs = [8.5, 9.0, 9.5, 10.0, 10.5, 11.0];
    let t = Instant::now();
    let curve = run_ber_with(&c, ReceiverSpec::Ldgt { half_len: 9 }, &ChannelSpec::Awgn, &snrs, BerOptions::new(200_000), 9)
        .unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let target = 1e-3;
    let crossing = curve.points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.ber >= target && b.ber < target && b.ber > 0.0).then(|| {
            let (la, lb) = (a.ber.log10(), b.ber.log10());
            a.snr_db + (target.log10() - la) / (lb - la) * (b.snr_db - a.snr_db)
        })
    });
    let theory = theory_snr_at(target);
    let min_bits = curve.points.iter().map(|p| p.bits).min().unwrap();
    let pass = match crossing {
        Some(x) => (x - theory).abs() <= 0.5 && min_bits >= 200_000 && elapsed <= 600.0,
        None => false,
    };
    report(
        "9",
        pass,
        format!(
            "measured {} dB vs theory {theory:.2} dB (limit 0.5 dB), min bits/point {min_bits}, {elapsed:.1}s",
            crossing.map_or("no crossing".to_string(), |x| format!("{x:.2}"))
        ),
    );
}

#[test]
fn criterion_10_local_window_ordering() {
    let c = build_config(256, 7, 0.9, 80, Constellation::Qpsk).unwrap();
    let stats = eva_stats(37.2, 100.0, &c).unwrap();
    let channel = ChannelSpec::Fading(stats);
    let receivers = [
        ReceiverSpec::LdgtStat { half_len: 9 },
        ReceiverSpec::Ldgt { half_len: 9 },
        ReceiverSpec::Truncated { half_len: 9 },
    ];
    let mse = paired_symbol_mse(&c, &receivers, &channel, 30.0, 1000, 10).unwrap();
    let pass = mse[0] <= mse[2] && mse[1] <= mse[2];
    report(
        "10",
        pass,
        format!("MSE ldgt-stat {:.4e}, ldgt {:.4e}, truncated {:.4e} over 1000 paired blocks", mse[0], mse[1], mse[2]),
    );
}
