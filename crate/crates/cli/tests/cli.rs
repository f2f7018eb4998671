use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gfdm_core::prelude::*;
use gfdm_core::windows::{read_freq_window_csv, read_local_window_csv};

fn gfdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfdm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gfdm(args);
    assert!(
        out.status.success(),
        "gfdm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    fs::write(&p, "K = 16\nM = 5\nbeta = 0.5\ncp_len = 8\nconstellation = \"16QAM\"\nseed = 11\n").unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn windows_round_trip_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("w");
    ok(&["windows", "--config", "default", "--out", out.to_str().unwrap(), "--L", "9"]);
    let cfg = build_config(256, 7, 0.1, 80, Constellation::Qpsk).unwrap();
    let g = rc_synthesis_window::<f64>(&cfg);
    let gamma = dual_window_fullband(&g, &cfg).unwrap();
    let g_read = read_freq_window_csv::<f64>(out.join("synthesis.csv"), cfg.tau(), WindowKind::Synthesis).unwrap();
    let d_read = read_freq_window_csv::<f64>(out.join("dual.csv"), cfg.tau(), WindowKind::AnalysisFull).unwrap();
    assert_eq!(g_read.spectrum(), g.spectrum());
    assert_eq!(d_read.spectrum(), gamma.spectrum());
    let w = ldgt_window_ideal(&build_local_system(&g, 9, &cfg).unwrap()).unwrap();
    assert_eq!(read_local_window_csv::<f64>(out.join("ldgt_L9.csv")).unwrap().values(), w.values());
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "windows");
    assert_eq!(m["config"]["N"], 1792);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn tx_rx_round_trip_recovers_bits() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let t = tmp.path().join("t");
    let w = tmp.path().join("w");
    ok(&["tx", "--config", &cfg, "--snr", "inf", "--channel", "eva-scaled:6", "--out", t.to_str().unwrap()]);
    ok(&["windows", "--config", &cfg, "--out", w.to_str().unwrap()]);
    let sent = fs::read_to_string(t.join("bits.txt")).unwrap();
    let rx_in = t.join("rx.csv");
    let taps = t.join("taps.csv");
    for (name, window) in [("fd-dgt", None), ("zf", None), ("time-dgt", Some(w.join("dual.csv"))), ("fd-dgt", Some(w.join("dual.csv")))] {
        let r = tmp.path().join(format!("r-{name}-{}", window.is_some()));
        let mut args = vec![
            "rx", "--config", &cfg, "--input", rx_in.to_str().unwrap(), "--taps", taps.to_str().unwrap(),
            "--receiver", name, "--out", r.to_str().unwrap(),
        ];
        let wp;
        if let Some(p) = &window {
            wp = p.to_str().unwrap().to_string();
            args.extend(["--window", &wp]);
        }
        ok(&args);
        assert_eq!(fs::read_to_string(r.join("bits.txt")).unwrap(), sent, "{name}");
        let m = manifest(&r);
        assert_eq!(m["inputs"].as_array().unwrap().len(), 2 + window.is_some() as usize);
    }
}

#[test]
fn ber_runs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        ok(&[
            "ber", "--config", &cfg, "--channel", "eva-scaled:6", "--receiver", "ldgt,trunc,fd-dgt", "--L", "6",
            "--snr", "0:5:20", "--min-bits", "5000", "--out", out.to_str().unwrap(),
        ]);
        fs::read_to_string(out.join("ber.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "receiver,snr_db,bits,errors,ber");
    assert_eq!(lines.len(), 1 + 3 * 5);
    let m = manifest(&tmp.path().join("a"));
    assert_eq!(m["master_seed"], 11);
    let replay = gfdm_core::params::parse_config(m["config_toml"].as_str().unwrap()).unwrap();
    assert_eq!(replay.1, Some(11));
    assert_eq!(replay.0.n(), 80);
}

#[test]
fn declared_ber_invocation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    ok(&[
        "ber", "--config", "eva_qpsk", "--receiver", "ldgt", "--L", "9", "--snr", "0:2:20", "--seed", "7",
        "--min-bits", "1", "--out", out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("ber.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert_eq!(manifest(&out)["master_seed"], 7);
}

#[test]
fn complexity_sweep_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    ok(&["complexity", "--M", "1:21", "--K", "256", "--L", "12", "--J", "4", "--I0", "8", "--out", out.to_str().unwrap()]);
    let csv = fs::read_to_string(out.join("complexity.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "receiver,M,K,L,count");
    assert_eq!(rows.len(), 1 + 21 * ReceiverClass::ALL.len());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn variance_sweep_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("v");
    ok(&["variance", "--config", &cfg, "--channel", "eva-scaled:6", "--betas", "0.1,0.9", "--out", out.to_str().unwrap()]);
    let csv = fs::read_to_string(out.join("variance.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("profile,beta,k,variance"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 16);
    for r in rows.iter().filter(|r| r[0] == "narrowband") {
        assert!(r[3].parse::<f64>().unwrap().abs() <= 1e-12);
    }
}

#[test]
fn failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(gfdm(&["ber", "--bogus"]).status.code(), Some(2));
    assert_eq!(gfdm(&["windows", "--L", "2000", "--out", o]).status.code(), Some(2));
    assert_eq!(gfdm(&["windows", "--channel", "nowhere", "--out", o]).status.code(), Some(2));
    let missing = gfdm(&["rx", "--input", tmp.path().join("none.csv").to_str().unwrap(), "--out", o]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    assert_eq!(gfdm(&["windows", "--config", "/no/such/file.toml", "--out", o]).status.code(), Some(4));
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "K = 4\nM = 3\nbeta = 0.5\ncp_len = 0\nconstellation = \"QPSK\"\nextra = 1\n").unwrap();
    assert_eq!(gfdm(&["windows", "--config", bad.to_str().unwrap(), "--out", o]).status.code(), Some(2));
}
