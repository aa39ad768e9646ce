use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use vsbi_core::io::log_grid;
use vsbi_core::jacobian::{
    droop_p_theta, ideal_vsbi_jacobian, load_scan, save_scan, DroopParams, IdealVsbiParams, JacobianEntry,
    PowerScaling, OMEGA_60HZ,
};
use vsbi_core::lti::freq_response;
use vsbi_core::scan::{linearity_deviation, run_jacobian_scan, sine_perturb_extract, DeviceSpec, ScanSettings};
use vsbi_core::{BlackBoxDevice, Error, JacobianScan, OperatingPoint, RationalTransferFunction, ScanConfig};

fn single_point(f: f64) -> ScanConfig {
    ScanConfig::with_frequencies(vec![f])
}

fn vsbi_params() -> IdealVsbiParams {
    IdealVsbiParams {
        r: 0.01,
        l: (1.0 / 3.0) / OMEGA_60HZ,
        op: OperatingPoint::new(0.5, 0.0, 1.0, OMEGA_60HZ).unwrap(),
        scaling: PowerScaling::ThreeHalves,
    }
}

#[test]
fn aemo_boundary_at_its_bandwidth() {
    let tf = RationalTransferFunction::from_coeffs(&[5.825e4], &[5.084e4, 450.9, 1.0]).unwrap();
    let dev = BlackBoxDevice::single(JacobianEntry::ThetaToP, tf);
    let g = sine_perturb_extract(&dev, JacobianEntry::ThetaToP, 23.09, &single_point(23.09)).unwrap();
    assert!((g.norm() / (1.1458 / 2f64.sqrt()) - 1.0).abs() < 0.01);
}

#[test]
fn static_gain_is_flat_with_zero_phase() {
    let dev = BlackBoxDevice::static_gain(2.5);
    for f in [0.5, 3.0, 17.0, 60.0] {
        let g = sine_perturb_extract(&dev, JacobianEntry::VToQ, f, &single_point(f)).unwrap();
        assert!((g.norm() - 2.5).abs() < 1e-9);
        assert!(g.arg().abs() < 1e-6);
    }
}

#[test]
fn droop_loop_at_30_hz() {
    let p = DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 };
    let dev = BlackBoxDevice::Droop(p);
    let g = sine_perturb_extract(&dev, JacobianEntry::ThetaToP, 30.0, &single_point(30.0)).unwrap();
    let want = droop_p_theta(&p).unwrap().eval_hz(30.0).unwrap();
    assert!((g.norm() / want.norm() - 1.0).abs() < 0.005);
    assert!((g / want).arg().to_degrees().abs() < 0.5);
}

#[test]
fn vsbi_scan_matches_closed_form() {
    let dev = BlackBoxDevice::ideal_vsbi(&vsbi_params()).unwrap();
    let cfg = ScanConfig::with_frequencies(log_grid(0.5, 60.0, 16));
    let run = run_jacobian_scan(&dev, &cfg).unwrap();
    assert!(run.failures.is_empty());
    let scan = run.scan;
    for (k, &f) in scan.frequencies.iter().enumerate() {
        let (pt, qv) = ideal_vsbi_jacobian(&vsbi_params(), Complex64::new(0.0, 2.0 * PI * f)).unwrap();
        let got_pt = scan.p_theta.as_ref().unwrap()[k];
        let got_qv = scan.q_v.as_ref().unwrap()[k];
        assert!((got_pt - pt).norm() / pt.norm() <= 0.01, "p_theta at {f} Hz");
        assert!((got_qv - qv).norm() / qv.norm() <= 0.01, "q_v at {f} Hz");
    }
}

#[test]
fn built_in_devices_match_their_transfer_functions() {
    let freqs = log_grid(0.5, 60.0, 12);
    let droop = BlackBoxDevice::Droop(DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 });
    let lp = BlackBoxDevice::single(
        JacobianEntry::VToQ,
        RationalTransferFunction::from_coeffs(&[4.118e4], &[4.118e4, 405.8, 1.0]).unwrap(),
    );
    for (dev, entry) in [(droop, JacobianEntry::ThetaToP), (lp, JacobianEntry::VToQ)] {
        let run = run_jacobian_scan(&dev, &ScanConfig::with_frequencies(freqs.clone())).unwrap();
        let tf = dev.analytic(entry).unwrap();
        let want = freq_response(&tf, &run.scan.frequencies).unwrap();
        for (g, w) in run.scan.entry(entry).unwrap().iter().zip(want.values()) {
            assert!((g - w).norm() / w.norm() <= 0.01);
        }
    }
}

#[test]
fn amplitude_halving_leaves_scan_unchanged() {
    let dev = BlackBoxDevice::ideal_vsbi(&vsbi_params()).unwrap();
    let cfg = ScanConfig::with_frequencies(log_grid(1.0, 40.0, 6));
    let a = run_jacobian_scan(&dev, &cfg).unwrap().scan;
    let b = run_jacobian_scan(&dev, &ScanConfig { amplitude: 0.005, ..cfg }).unwrap().scan;
    for entry in [JacobianEntry::ThetaToP, JacobianEntry::VToQ] {
        for (x, y) in a.entry(entry).unwrap().iter().zip(b.entry(entry).unwrap()) {
            assert!((x - y).norm() / x.norm() <= 0.002);
        }
    }
}

#[test]
fn amplitude_decade_is_linear() {
    let dev = BlackBoxDevice::Droop(DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 });
    let cfg = single_point(5.0);
    assert!(linearity_deviation(&dev, JacobianEntry::ThetaToP, 5.0, &cfg, 10.0).unwrap() <= 0.002);
    assert!(linearity_deviation(&dev, JacobianEntry::ThetaToP, 5.0, &cfg, 2.0).unwrap() <= 0.001);
}

#[test]
fn invalid_configs_are_rejected() {
    let dev = BlackBoxDevice::static_gain(1.0);
    assert!(run_jacobian_scan(&dev, &ScanConfig::with_frequencies(vec![])).is_err());
    let cfg = ScanConfig { z_test: 0.1, ..ScanConfig::default() };
    assert!(run_jacobian_scan(&dev, &cfg).is_err());
    let cfg = ScanConfig { amplitude: 0.0, ..ScanConfig::default() };
    assert!(run_jacobian_scan(&dev, &cfg).is_err());
    let cfg = ScanConfig { measure_cycles: 2, ..ScanConfig::default() };
    assert!(run_jacobian_scan(&dev, &cfg).is_err());
    let cfg = ScanConfig { dt: Some(1e-2), ..ScanConfig::default() };
    assert!(run_jacobian_scan(&dev, &cfg).is_err());
}

#[test]
fn missing_channel_is_reported() {
    let dev = BlackBoxDevice::Droop(DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 });
    assert!(matches!(
        sine_perturb_extract(&dev, JacobianEntry::VToQ, 5.0, &single_point(5.0)),
        Err(Error::ChannelMissing(_))
    ));
    // the droop device still scans its angle channel and leaves q_v empty
    let run = run_jacobian_scan(&dev, &ScanConfig::with_frequencies(vec![2.0, 4.0])).unwrap();
    assert!(run.scan.q_v.is_none() && run.scan.is_partial());
}

#[test]
fn save_load_round_trip_is_exact_at_print_precision() {
    let dev = BlackBoxDevice::ideal_vsbi(&vsbi_params()).unwrap();
    let scan = run_jacobian_scan(&dev, &ScanConfig::with_frequencies(log_grid(1.0, 30.0, 5))).unwrap().scan;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    save_scan(&scan, &path).unwrap();
    let back = load_scan(&path).unwrap();
    save_scan(&back, &dir.path().join("again.csv")).unwrap();
    let a = std::fs::read(&path).unwrap();
    let b = std::fs::read(dir.path().join("again.csv")).unwrap();
    assert_eq!(a, b);
    let parse = |s: f64| format!("{s:.12e}").parse::<f64>().unwrap();
    for (x, y) in scan.frequencies.iter().zip(&back.frequencies) {
        assert_eq!(parse(*x).to_bits(), y.to_bits());
    }
}

#[test]
fn malformed_scan_files() {
    let non_monotone = "f_hz,ptheta_re,ptheta_im,qv_re,qv_im\n1,1,0,1,0\n3,1,0,1,0\n2,1,0,1,0\n";
    match JacobianScan::from_csv_reader(non_monotone.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let bad_number = "f_hz,ptheta_re,ptheta_im\n1,abc,0\n";
    assert!(matches!(JacobianScan::from_csv_reader(bad_number.as_bytes()), Err(Error::Parse { line: 2, .. })));
    let p_only = "f_hz,ptheta_re,ptheta_im\n1,1,0\n2,0.5,-0.5\n";
    let scan = JacobianScan::from_csv_reader(p_only.as_bytes()).unwrap();
    assert!(scan.is_partial() && scan.q_v.is_none() && scan.p_theta.is_some());
}

#[test]
fn three_consecutive_failures_abort() {
    // a 10 Hz resonance with a long ring-down; no settling time is allowed
    let tf = RationalTransferFunction::from_coeffs(&[1.0], &[(2.0 * PI * 10.0f64).powi(2), 0.5, 1.0]).unwrap();
    let dev = BlackBoxDevice::single(JacobianEntry::ThetaToP, tf);
    let cfg = ScanConfig {
        settle_time_s: Some(0.0),
        settle_cycles: Some(3),
        ..ScanConfig::with_frequencies(vec![6.0, 7.0, 8.0, 9.0])
    };
    match run_jacobian_scan(&dev, &cfg) {
        Err(Error::ScanAborted { freq_hz, .. }) => assert_eq!(freq_hz, 8.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn scan_is_deterministic() {
    let dev = BlackBoxDevice::Droop(DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 });
    let cfg = ScanConfig::with_frequencies(log_grid(1.0, 50.0, 9));
    let a = run_jacobian_scan(&dev, &cfg).unwrap().scan.to_csv();
    let b = run_jacobian_scan(&dev, &cfg).unwrap().scan.to_csv();
    assert_eq!(a, b);
}

#[test]
fn settings_layering() {
    let file = ScanSettings::from_toml_str("f_min_hz = 1.0\nf_max_hz = 30.0\npoints = 12\namplitude = 0.02\n").unwrap();
    let flags = ScanSettings { amplitude: Some(0.005), ..Default::default() };
    let cfg = file.overlay(flags).resolve().unwrap();
    assert_eq!(cfg.amplitude, 0.005);
    assert_eq!(cfg.frequencies.len(), 12);
    assert_eq!(cfg.frequencies[0], 1.0);
    assert_eq!(ScanSettings::default().resolve().unwrap(), ScanConfig::default());
    assert!(ScanSettings::from_toml_str("amplitud = 0.1\n").is_err());
}

#[test]
fn device_files() {
    let droop = DeviceSpec::from_toml_str("kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.05\nx_coup = 0.2\n").unwrap();
    assert!(matches!(droop.build().unwrap(), BlackBoxDevice::Droop(_)));
    let tf = DeviceSpec::from_toml_str(
        "kind = \"transfer-function\"\n[q_v]\nnumerator = [41180.0]\ndenominator = [1.0, 405.8, 41180.0]\n",
    )
    .unwrap()
    .build()
    .unwrap();
    assert!(tf.has(JacobianEntry::VToQ) && !tf.has(JacobianEntry::ThetaToP));
    let unstable = DeviceSpec::from_toml_str(
        "kind = \"transfer-function\"\n[p_theta]\nnumerator = [1.0]\ndenominator = [1.0, -1.0]\n",
    )
    .unwrap();
    assert!(matches!(unstable.build(), Err(Error::Unstable { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn whole_period_correlation_has_no_leakage(k in -5.0f64..5.0, f in 0.3f64..80.0, amp in 1e-3f64..0.5) {
        prop_assume!(k.abs() > 1e-3);
        let dev = BlackBoxDevice::static_gain(k);
        let cfg = ScanConfig { amplitude: amp, ..single_point(f) };
        let g = sine_perturb_extract(&dev, JacobianEntry::ThetaToP, f, &cfg).unwrap();
        prop_assert!((g - Complex64::new(k, 0.0)).norm() <= 1e-9 * k.abs().max(1.0));
    }
}
