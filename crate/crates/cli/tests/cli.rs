use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn kcomb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcomb"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    let text = format!("output_dir = {:?}\n{body}", dir.join("out"));
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

const SMALL_DSP: &str = "[dsp]\nsegment_length = 20000\nn_segments = 20\n";

#[test]
fn threshold_of_default_device() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = kcomb(&["threshold", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "k_star"), "1");
    let p: f64 = value(&r, "p_th_mw").parse().unwrap();
    assert!((p - 53.0).abs() < 1e-3, "{p}");
    assert_eq!(value(&r, "config_hash").len(), 64);
    assert!(dir.path().join("out/threshold_report.txt").exists());
}

#[test]
fn zero_coupling_has_no_threshold() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[system]\ng = 0.0\n");
    let o = kcomb(&["threshold", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no threshold"), "{}", stderr(&o));
}

#[test]
fn malformed_config_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[system]\nkapa = 1.0\n");
    let o = kcomb(&["threshold", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("system.kapa"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "[system]\nm = \"two\"\n");
    let o = kcomb(&["threshold", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("system.m"), "{}", stderr(&o));
}

#[test]
fn usage_errors_are_config_errors() {
    assert_eq!(kcomb(&["threshold"]).status.code(), Some(1));
    assert_eq!(kcomb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kcomb(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_and_out_dir_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let alt = dir.path().join("alt");
    let a = kcomb(&[
        "threshold",
        cfg.to_str().unwrap(),
        "--out-dir",
        alt.to_str().unwrap(),
    ]);
    assert!(a.status.success());
    assert!(alt.join("threshold_report.txt").exists());
    let b = kcomb(&["threshold", cfg.to_str().unwrap(), "--seed", "99"]);
    assert_ne!(
        value(&stdout(&a), "config_hash"),
        value(&stdout(&b), "config_hash")
    );
}

#[test]
fn below_threshold_sweep_marks_dark_modes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[sweep]\np_over_pth = [0.5, 0.8, 0.95]\n");
    let o = kcomb(&["sweep", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(dir.path().join("out/noise.csv")).unwrap();
    let header = rd.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        for c in [
            "var_n1_dB",
            "var_n2_dB",
            "varC_dB",
            "varBP_dB",
            "covMP_snu",
            "var_n1_dB_det",
        ] {
            assert_eq!(&r[col(c)], "dark");
        }
    }
}

#[test]
fn sweep_above_threshold_is_squeezed_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[system]\nm = 3\n");
    let o = kcomb(&["sweep", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let noise = dir.path().join("out/noise.csv");
    let first = fs::read(&noise).unwrap();
    let mut rd = csv::Reader::from_path(&noise).unwrap();
    let header = rd.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "var_n1_dB").unwrap();
    let v: Vec<f64> = rd
        .records()
        .map(|r| r.unwrap()[col].parse().unwrap())
        .collect();
    assert_eq!(v.len(), 13);
    assert!(v.iter().all(|&x| x < 0.0));
    assert!(v.last().unwrap() > v.first().unwrap());
    assert!(dir.path().join("out/branch_sweep.csv").exists());

    let again = kcomb(&["sweep", cfg.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(fs::read(&noise).unwrap(), first);
    assert_eq!(stdout(&o), stdout(&again));
}

#[test]
fn oracle_default_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = kcomb(&["oracle", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "dim"), "1024");
    assert_eq!(value(&r, "passed"), "true");
    assert_eq!(value(&r, "commutator_C_H.pass"), "true");
}

#[test]
fn oracle_guards() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[oracle]\ncutoff = 0\n");
    let o = kcomb(&["oracle", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trivial space"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "[oracle]\ndim_limit = 100\n");
    let o = kcomb(&["oracle", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension overflow"), "{}", stderr(&o));
}

fn synth_and_calibrate(dir: &Path, body: &str) -> PathBuf {
    let cfg = write_config(dir, body);
    let c = cfg.to_str().unwrap();
    let o = kcomb(&["dsp", "synth", c, "--csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.join("out");
    let runs: Vec<String> = (0..4)
        .map(|i| out.join(format!("cal_{i}.kct")).display().to_string())
        .collect();
    let mut args = vec!["dsp", "calibrate", c];
    args.extend(runs.iter().map(String::as_str));
    let o = kcomb(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    cfg
}

#[test]
fn dsp_csv_import_matches_binary() {
    let dir = TempDir::new().unwrap();
    let cfg = synth_and_calibrate(dir.path(), SMALL_DSP);
    let out = dir.path().join("out");
    let cal = out.join("calibration.toml");
    let run = |t: &str| {
        let o = kcomb(&[
            "dsp",
            "process",
            cfg.to_str().unwrap(),
            out.join(t).to_str().unwrap(),
            "--calibration",
            cal.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    let bin = run("traces.kct");
    let csv = run("traces.csv");
    assert_eq!(bin, csv);
    assert!(value(&bin, "delta1_db").parse::<f64>().unwrap() < -1.0);
    assert!(out.join("variance_vs_frequency.csv").exists());
}

#[test]
fn dsp_missing_calibration_names_detector() {
    let dir = TempDir::new().unwrap();
    let cfg = synth_and_calibrate(dir.path(), SMALL_DSP);
    let out = dir.path().join("out");
    let full = fs::read_to_string(out.join("calibration.toml")).unwrap();
    let trimmed: String = full
        .split("[[detector]]")
        .filter(|block| !block.contains("label = \"-2\""))
        .collect::<Vec<_>>()
        .join("[[detector]]");
    let cal = out.join("partial.toml");
    fs::write(&cal, trimmed).unwrap();
    let o = kcomb(&[
        "dsp",
        "process",
        cfg.to_str().unwrap(),
        out.join("traces.kct").to_str().unwrap(),
        "--calibration",
        cal.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("missing calibration for detector -2"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn dsp_recovers_simulated_noise_within_three_sigma() {
    let dir = TempDir::new().unwrap();
    let body = "[dsp]\nsource = \"simulation\"\nsegment_length = 20000\nn_segments = 50\nhalf_width = 10\n";
    let cfg = synth_and_calibrate(dir.path(), body);
    let synth = fs::read_to_string(dir.path().join("out/synth_report.txt")).unwrap();
    let out = dir.path().join("out");
    let o = kcomb(&[
        "dsp",
        "process",
        cfg.to_str().unwrap(),
        out.join("traces.kct").to_str().unwrap(),
        "--calibration",
        out.join("calibration.toml").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = stdout(&o);
    for (sim, got) in [
        ("simulated_delta1_db", "delta1"),
        ("simulated_carlos_db", "carlos"),
    ] {
        let want: f64 = value(&synth, sim).parse().unwrap();
        let have: f64 = value(&rep, &format!("{got}_db")).parse().unwrap();
        let err: f64 = value(&rep, &format!("{got}_db_err")).parse().unwrap();
        assert!(
            (have - want).abs() <= 3.0 * err,
            "{got}: {have} vs {want} +- {err}"
        );
    }
}

#[test]
fn dsp_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    synth_and_calibrate(a.path(), SMALL_DSP);
    synth_and_calibrate(b.path(), SMALL_DSP);
    for f in ["traces.kct", "cal_0.kct", "calibration.toml"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap()
        );
    }
}
