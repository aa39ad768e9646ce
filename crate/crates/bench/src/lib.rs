//! Workloads shared by the criterion benchmarks in `benches/`.

use vsbi_core::envelope::preset;
use vsbi_core::io::log_grid;
use vsbi_core::jacobian::DroopParams;
use vsbi_core::{build_envelope, BlackBoxDevice, EnvelopeOptions, Preset, RationalTransferFunction, ScanConfig};

/// The AEMO low-pass boundary, a representative second-order section.
pub fn aemo_boundary() -> RationalTransferFunction {
    build_envelope(&preset(Preset::AemoP), &EnvelopeOptions::default()).expect("preset envelopes build").lpf.tf
}

/// 1000 log-spaced frequencies over 0.1 Hz .. 1 kHz.
pub fn dense_grid() -> Vec<f64> {
    log_grid(0.1, 1000.0, 1000)
}

pub fn droop_device() -> BlackBoxDevice {
    BlackBoxDevice::Droop(DroopParams { droop_d: 0.05, t_f: 0.1, x_coup: 0.2 })
}

/// Angle channel only, at a single frequency.
pub fn single_point_scan(f_hz: f64) -> ScanConfig {
    ScanConfig {
        entries: vec![vsbi_core::jacobian::JacobianEntry::ThetaToP],
        ..ScanConfig::with_frequencies(vec![f_hz])
    }
}
