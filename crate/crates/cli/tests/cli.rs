//! End-to-end runs of the `vsbi` binary: exit codes, file outputs and
//! numeric results checked against closed forms.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;
use vsbi_core::envelope::preset;
use vsbi_core::io::log_grid;
use vsbi_core::jacobian::{ideal_vsbi_jacobian, save_scan, IdealVsbiParams, PowerScaling};
use vsbi_core::modal::{parse_bundle, synthetic_fixture, write_bundle};
use vsbi_core::{build_envelope, ComplianceEnvelope, EnvelopeOptions, JacobianScan, OperatingPoint, Preset};

fn vsbi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsbi")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/modal_fixture.bundle")
}

/// numeric columns of a CSV file, header skipped
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

// ---------------------------------------------------------------- envelope

#[test]
fn ercot_q_envelope_landmarks() {
    let tmp = TempDir::new().unwrap();
    let out = vsbi(tmp.path(), &["envelope", "--preset", "ercot-q", "--out-dir", "out"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let meta = json(&tmp.path().join("out/envelope.json"));
    assert!(within(meta["f_lo_hz"].as_f64().unwrap(), 2.47, 0.01));
    assert!(within(meta["f_int_hz"].as_f64().unwrap(), 7.17, 0.01));
    assert!(within(meta["f_hi_hz"].as_f64().unwrap(), 20.8, 0.01));
    for f in ["envelope.csv", "envelope.svg"] {
        assert!(tmp.path().join("out").join(f).is_file(), "{f}");
    }
}

#[test]
fn aemo_envelope_is_low_pass_only() {
    let tmp = TempDir::new().unwrap();
    let out = vsbi(tmp.path(), &["envelope", "--preset", "aemo-p", "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let meta = json(&tmp.path().join("envelope.json"));
    assert!(meta["hpf"].is_null());
    assert!(meta["f_int_hz"].is_null());
    assert!(within(meta["f_hi_hz"].as_f64().unwrap(), 23.09, 0.01));
    // only the requested format is written
    assert!(!tmp.path().join("envelope.csv").exists());
    assert!(!tmp.path().join("envelope.svg").exists());
}

#[test]
fn explicit_flags_reproduce_the_preset_boundary() {
    let tmp = TempDir::new().unwrap();
    let explicit = vsbi(
        tmp.path(),
        &["envelope", "--rise-ms", "15", "--peak", "1.1459", "--zeta", "1", "--format", "structured", "--out-dir", "a"],
    );
    assert_eq!(code(&explicit), 0);
    let lpf = &json(&tmp.path().join("a/envelope.json"))["lpf"];
    // K·ω² / (s² + 2ζωs + ω²) with coefficients in ascending powers of s
    let num = lpf["numerator"][0].as_f64().unwrap();
    let den: Vec<f64> = lpf["denominator"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(within(num, 58250.0, 0.005), "{num}");
    assert!(within(den[1], 450.9, 0.005), "{}", den[1]);
    assert!(within(den[0], 50840.0, 0.005), "{}", den[0]);
    assert_eq!(den[2], 1.0);

    vsbi(tmp.path(), &["envelope", "--preset", "aemo-p", "--format", "structured", "--out-dir", "b"]);
    let preset_lpf = &json(&tmp.path().join("b/envelope.json"))["lpf"];
    for key in ["omega_n_rad_s", "gain", "bandwidth_hz"] {
        assert!(within(lpf[key].as_f64().unwrap(), preset_lpf[key].as_f64().unwrap(), 1e-4), "{key}");
    }
}

#[test]
fn envelope_argument_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cases: [&[&str]; 5] = [
        &["envelope", "--preset", "aemo-p", "--rise-ms", "3"],
        &["envelope", "--rise-ms", "15"],
        &["envelope", "--rise-ms", "-1", "--peak", "1"],
        &["envelope", "--preset", "nerc-x"],
        &["envelope", "--rise-ms", "15", "--peak", "1", "--zeta", "3"],
    ];
    for args in cases {
        let out = vsbi(tmp.path(), args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn envelope_outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    for dir in ["r1", "r2"] {
        assert_eq!(code(&vsbi(tmp.path(), &["envelope", "--preset", "ercot-q", "--out-dir", dir])), 0);
    }
    for f in ["envelope.csv", "envelope.json", "envelope.svg"] {
        assert_eq!(
            fs::read(tmp.path().join("r1").join(f)).unwrap(),
            fs::read(tmp.path().join("r2").join(f)).unwrap(),
            "{f}"
        );
    }
}

// ------------------------------------------------------------------- check

fn ercot_q() -> ComplianceEnvelope {
    build_envelope(&preset(Preset::ErcotQ), &EnvelopeOptions::default()).unwrap()
}

fn sampled_scan(dir: &Path, name: &str, freqs: Vec<f64>, scale: f64) -> PathBuf {
    let env = ercot_q();
    let v = freqs.iter().map(|&f| Complex64::new(0.0, scale * env.magnitude_unchecked(f))).collect();
    let path = dir.join(name);
    save_scan(&JacobianScan::new(freqs, None, Some(v), None, None).unwrap(), &path).unwrap();
    path
}

#[test]
fn check_exit_code_follows_the_verdict() {
    let tmp = TempDir::new().unwrap();
    let env = ercot_q();
    let band = || log_grid(env.f_lo, env.f_hi, 30);
    sampled_scan(tmp.path(), "exact.csv", band(), 1.0);
    sampled_scan(tmp.path(), "low.csv", band(), 0.9);
    sampled_scan(tmp.path(), "narrow.csv", log_grid(10.0, 20.0, 30), 1.0);

    let pass = vsbi(tmp.path(), &["check", "--scan", "exact.csv", "--preset", "ercot-q", "--out-dir", "pass"]);
    assert_eq!(code(&pass), 0, "{}", stdout(&pass));
    let fail = vsbi(tmp.path(), &["check", "--scan", "low.csv", "--preset", "ercot-q", "--out-dir", "fail"]);
    assert_eq!(code(&fail), 1);
    let inc = vsbi(tmp.path(), &["check", "--scan", "narrow.csv", "--preset", "ercot-q", "--out-dir", "inc"]);
    assert_eq!(code(&inc), 3);

    // 0.9× sits 0.915 dB below the envelope everywhere
    let tolerant = vsbi(
        tmp.path(),
        &["check", "--scan", "low.csv", "--preset", "ercot-q", "--tolerance-db", "1", "--out-dir", "tol"],
    );
    assert_eq!(code(&tolerant), 0);

    let doc = json(&tmp.path().join("fail/check.json"));
    for key in ["channel", "verdict", "band_hz", "worst_margin_db", "worst_frequency_hz", "points"] {
        assert!(doc.get(key).is_some(), "{key}");
    }
    assert_eq!(doc["verdict"], "FAIL");
    assert!((doc["worst_margin_db"].as_f64().unwrap() - 20.0 * 0.9f64.log10()).abs() < 1e-9);
    assert_eq!(doc["points"].as_array().unwrap().len(), 30);
    assert_eq!(json(&tmp.path().join("inc/check.json"))["verdict"], "INCOMPLETE");
    for f in ["check.csv", "check.svg"] {
        assert!(tmp.path().join("pass").join(f).is_file());
    }
}

#[test]
fn check_input_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "garbage.csv", "f_hz,qv_re,qv_im\n1.0,abc,0\n");
    let f = log_grid(1.0, 30.0, 20);
    let pt = f.iter().map(|_| Complex64::new(1.0, 0.0)).collect();
    save_scan(&JacobianScan::new(f, Some(pt), None, None, None).unwrap(), &tmp.path().join("ptheta.csv")).unwrap();

    for scan in ["garbage.csv", "missing.csv", "ptheta.csv"] {
        let out = vsbi(tmp.path(), &["check", "--scan", scan, "--preset", "ercot-q"]);
        assert_eq!(code(&out), 2, "{scan}");
    }
}

// -------------------------------------------------------------------- scan

const DROOP: &str = "kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.1\nx_coup = 0.2\n";

fn scan_values(path: &Path, col: usize) -> Vec<(f64, Complex64)> {
    csv_rows(path)
        .into_iter()
        .map(|r| {
            let p = |i: usize| r[i].parse::<f64>().unwrap();
            (p(0), Complex64::new(p(col), p(col + 1)))
        })
        .collect()
}

#[test]
fn droop_scan_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "droop.toml", DROOP);
    let out = vsbi(tmp.path(), &["scan", "--device", "droop.toml", "--frequencies", "0.7,3,12,40", "--out-dir", "s"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (d, t, x) = (0.05, 0.1, 0.2);
    let rows = scan_values(&tmp.path().join("s/scan.csv"), 1);
    assert_eq!(rows.len(), 4);
    for (f, got) in rows {
        let s = Complex64::new(0.0, 2.0 * PI * f);
        let want = -(t * s * s + s) / (x * t * s * s + x * s + d);
        assert!((got - want).norm() <= 0.01 * want.norm(), "{f} Hz: {got} vs {want}");
    }
}

#[test]
fn vsbi_scan_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "vsbi.toml", "kind = \"ideal-vsbi\"\nr = 0.02\nx = 0.15\nscaling = \"unity\"\n");
    let out = vsbi(
        tmp.path(),
        &[
            "scan",
            "--device",
            "vsbi.toml",
            "--f-min",
            "2",
            "--f-max",
            "40",
            "--points",
            "6",
            "--entries",
            "theta_to_p,v_to_q",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let omega_0 = 2.0 * PI * 60.0;
    let params = IdealVsbiParams {
        r: 0.02,
        l: 0.15 / omega_0,
        op: OperatingPoint::new(0.0, 0.0, 1.0, omega_0).unwrap(),
        scaling: PowerScaling::Unity,
    };
    let pt = scan_values(&tmp.path().join("scan.csv"), 1);
    let qv = scan_values(&tmp.path().join("scan.csv"), 3);
    assert_eq!(pt.len(), 6);
    for ((f, got_pt), (_, got_qv)) in pt.into_iter().zip(qv) {
        let (want_pt, want_qv) = ideal_vsbi_jacobian(&params, Complex64::new(0.0, 2.0 * PI * f)).unwrap();
        assert!((got_pt - want_pt).norm() <= 0.01 * want_pt.norm(), "P/θ at {f} Hz");
        assert!((got_qv - want_qv).norm() <= 0.01 * want_qv.norm(), "Q/V at {f} Hz");
    }
}

#[test]
fn scan_is_reproducible_bit_for_bit() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "droop.toml", DROOP);
    for dir in ["a", "b"] {
        let out = vsbi(tmp.path(), &["scan", "--device", "droop.toml", "--points", "8", "--out-dir", dir]);
        assert_eq!(code(&out), 0);
    }
    for f in ["scan.csv", "scan.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn scan_flags_override_config_file_over_defaults() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "droop.toml", DROOP);
    write(tmp.path(), "cfg.toml", "f_min_hz = 2.0\nf_max_hz = 20.0\npoints = 5\nmeasure_cycles = 6\n");

    let from_file = vsbi(tmp.path(), &["scan", "--device", "droop.toml", "--config", "cfg.toml", "--out-dir", "file"]);
    assert_eq!(code(&from_file), 0);
    let cfg = &json(&tmp.path().join("file/scan.json"))["config"];
    assert_eq!(cfg["frequencies"].as_array().unwrap().len(), 5);
    assert_eq!(cfg["measure_cycles"], 6);
    assert_eq!(cfg["amplitude"], 0.01);

    let flags = vsbi(
        tmp.path(),
        &[
            "scan",
            "--device",
            "droop.toml",
            "--config",
            "cfg.toml",
            "--points",
            "3",
            "--amplitude",
            "0.02",
            "--out-dir",
            "flags",
        ],
    );
    assert_eq!(code(&flags), 0);
    let cfg = &json(&tmp.path().join("flags/scan.json"))["config"];
    let freqs: Vec<f64> = cfg["frequencies"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(freqs.len(), 3);
    assert_eq!((freqs[0], freqs[2]), (2.0, 20.0));
    assert_eq!(cfg["measure_cycles"], 6);
    assert_eq!(cfg["amplitude"], 0.02);
    assert_eq!(csv_rows(&tmp.path().join("flags/scan.csv")).len(), 3);
}

#[test]
fn scan_rejects_bad_devices_and_configs() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "droop.toml", DROOP);
    write(tmp.path(), "nocoupling.toml", "kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.1\nx_coup = 0.0\n");
    write(tmp.path(), "negative.toml", "kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.1\nx_coup = -0.2\n");
    write(
        tmp.path(),
        "unstable.toml",
        "kind = \"transfer-function\"\n[q_v]\nnumerator = [1.0]\ndenominator = [1.0, -2.0, 5.0]\n",
    );
    write(tmp.path(), "typo.toml", "f_min = 1.0\n");
    let cases: [&[&str]; 6] = [
        &["scan", "--device", "nocoupling.toml"],
        &["scan", "--device", "negative.toml"],
        &["scan", "--device", "unstable.toml"],
        &["scan", "--device", "droop.toml", "--config", "typo.toml"],
        &["scan", "--device", "droop.toml", "--z-test", "0.1"],
        &["scan", "--device", "droop.toml", "--entries", "theta_to_x"],
    ];
    for args in cases {
        let out = vsbi(tmp.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!tmp.path().join("scan.csv").exists());
    }
}

// ------------------------------------------------------------------ verify

fn boundary_device(dir: &Path, name: &str, omega_scale: f64) {
    let env = build_envelope(&preset(Preset::AemoP), &EnvelopeOptions::default()).unwrap();
    let p = env.lpf.params;
    let (k, z, w) = (p.gain, p.zeta, omega_scale * p.omega_n);
    write(
        dir,
        name,
        &format!(
            "kind = \"transfer-function\"\n[p_theta]\nnumerator = [{:e}]\ndenominator = [1.0, {:e}, {:e}]\n",
            k * w * w,
            2.0 * z * w,
            w * w
        ),
    );
}

#[test]
fn verify_boundary_device_passes_consistently() {
    let tmp = TempDir::new().unwrap();
    boundary_device(tmp.path(), "boundary.toml", 1.0);
    let out = vsbi(tmp.path(), &["verify", "--device", "boundary.toml", "--preset", "aemo-p", "-v"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let doc = json(&tmp.path().join("verify.json"));
    assert_eq!(doc["td_verdict"], "PASS");
    assert_eq!(doc["fd_verdict"], "PASS");
    assert_eq!(doc["consistent"], true);
    assert!(within(doc["rise_time_s"].as_f64().unwrap(), 0.015, 0.02));
    assert!(stdout(&out).contains("rise (0-90 %)"));
    for f in ["verify.csv", "verify.svg"] {
        assert!(tmp.path().join(f).is_file());
    }
}

#[test]
fn verify_slowed_device_fails_consistently() {
    let tmp = TempDir::new().unwrap();
    boundary_device(tmp.path(), "slow.toml", 0.5);
    let out = vsbi(tmp.path(), &["verify", "--device", "slow.toml", "--preset", "aemo-p"]);
    assert_eq!(code(&out), 1);
    let doc = json(&tmp.path().join("verify.json"));
    assert_eq!(doc["td_verdict"], "FAIL");
    assert_eq!(doc["fd_verdict"], "FAIL");
    assert_eq!(doc["consistent"], true);
}

#[test]
fn verify_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "unstable.toml",
        "kind = \"transfer-function\"\n[p_theta]\nnumerator = [1.0]\ndenominator = [1.0, -1.0]\n",
    );
    boundary_device(tmp.path(), "boundary.toml", 1.0);
    // the device only has a P/θ channel, ERCOT-Q asks for Q/V
    let cases: [&[&str]; 2] = [
        &["verify", "--device", "unstable.toml", "--preset", "aemo-p"],
        &["verify", "--device", "boundary.toml", "--preset", "ercot-q"],
    ];
    for args in cases {
        assert_eq!(code(&vsbi(tmp.path(), args)), 2, "{args:?}");
    }
}

// ------------------------------------------------------------------- modal

#[test]
fn shipped_fixture_matches_its_generator() {
    let tmp = TempDir::new().unwrap();
    let (model, _) = synthetic_fixture().unwrap();
    let regenerated = tmp.path().join("fixture.bundle");
    write_bundle(&model, &regenerated).unwrap();
    assert_eq!(fs::read(&regenerated).unwrap(), fs::read(fixture_path()).unwrap());
    let shipped = parse_bundle(&fs::read_to_string(fixture_path()).unwrap()).unwrap();
    assert_eq!(shipped.n_states(), 12);
    assert!((shipped.a() - model.a()).amax() < 1e-10);
}

#[test]
fn modal_fixture_puts_the_weak_mode_first() {
    let tmp = TempDir::new().unwrap();
    let bundle = fixture_path();
    let out = vsbi(tmp.path(), &["modal", "--bundle", bundle.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, spectrum) = synthetic_fixture().unwrap();

    let modes = csv_rows(&tmp.path().join("modes.csv"));
    assert_eq!(modes.len(), 8);
    let first = &modes[0];
    assert!((first[1].parse::<f64>().unwrap() - spectrum.weak_mode.re).abs() < 1e-8);
    assert!((first[2].parse::<f64>().unwrap() - spectrum.weak_mode.im).abs() < 1e-8);
    assert!((first[4].parse::<f64>().unwrap() - spectrum.weak_damping_pct).abs() < 1e-6);
    let damping: Vec<f64> = modes.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(damping.windows(2).all(|w| w[0] <= w[1]));

    let line = stdout(&out).lines().find(|l| l.contains("least damped")).unwrap().to_string();
    assert!(line.trim_start().starts_with('1'), "{line}");

    let doc = json(&tmp.path().join("modal.json"));
    let m0 = &doc["modes"][0];
    assert_eq!(m0["least_damped"], true);
    assert_eq!(m0["participation"][spectrum.weak_device], 1.0);
    assert_eq!(doc["modes"][1]["least_damped"], false);

    let part = csv_rows(&tmp.path().join("participation.csv"));
    assert_eq!(part.len(), 8 * 3);
    let obs = csv_rows(&tmp.path().join("observability.csv"));
    assert_eq!(obs.len(), 8 * 3);
}

#[test]
fn modal_diagonal_model_sorts_real_modes() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "diag.bundle",
        "[model]\nn = 3\nm = 0\n\n[state_groups]\na = [0]\nb = [1, 2]\n\n%% A\n-3,0,0\n0,-1,0\n0,0,-2\n%% C\n",
    );
    let out = vsbi(tmp.path(), &["modal", "--bundle", "diag.bundle", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let re: Vec<f64> = csv_rows(&tmp.path().join("modes.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(re, vec![-1.0, -2.0, -3.0]);
    assert!(!tmp.path().join("modal.json").exists());
}

#[test]
fn modal_rejects_bad_bundles() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "overlap.bundle",
        "[model]\nn = 2\nm = 0\n\n[state_groups]\na = [0, 1]\nb = [1]\n\n%% A\n-1,0\n0,-2\n%% C\n",
    );
    write(tmp.path(), "short.bundle", "[model]\nn = 2\nm = 0\n\n%% A\n-1,0\n%% C\n");
    for b in ["overlap.bundle", "short.bundle", "absent.bundle"] {
        let out = vsbi(tmp.path(), &["modal", "--bundle", b]);
        assert_eq!(code(&out), 2, "{b}");
        assert!(!tmp.path().join("modes.csv").exists());
    }
}

#[test]
fn modal_outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let bundle = fixture_path();
    for dir in ["a", "b"] {
        assert_eq!(code(&vsbi(tmp.path(), &["modal", "--bundle", bundle.to_str().unwrap(), "--out-dir", dir])), 0);
    }
    for f in ["modes.csv", "participation.csv", "observability.csv", "modal.json"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}
