//! Jacobian scans of black-box linear devices by single-tone perturbation.
//!
//! Each grid frequency gets its own simulation: the terminal angle or
//! magnitude is driven with `A·sin(2πft)`, the device settles, and the
//! response is correlated against sine and cosine over whole periods. The
//! integration step is chosen per frequency so that a period spans an integer
//! number of samples, which makes the correlation leakage-free.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::io::log_grid;
use crate::jacobian::{
    droop_p_theta, DroopParams, IdealVsbiParams, JacobianEntry, JacobianScan, OperatingPoint, PowerScaling,
};
use crate::lti::{check_grid, LinearSystem, RationalTransferFunction};
use crate::{Error, Result};

/// Stationarity limit on period-to-period RMS variation of the measured response.
pub const STATIONARITY_TOL: f64 = 0.01;
/// Consecutive failed frequencies that abort a scan.
pub const MAX_CONSECUTIVE_FAILURES: usize = 3;

const MIN_SAMPLES_PER_PERIOD: usize = 100;
/// Largest `|λ|·dt` allowed for the fastest device pole.
const MAX_POLE_STEP: f64 = 0.05;
/// Transient decay, in slowest time constants, before measuring.
const SETTLE_TIME_CONSTANTS: f64 = 12.0;

/// Per-channel transfer functions of a linear device.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelTransferFunctions {
    pub p_theta: Option<RationalTransferFunction>,
    pub q_v: Option<RationalTransferFunction>,
    pub p_v: Option<RationalTransferFunction>,
    pub q_theta: Option<RationalTransferFunction>,
}

impl ChannelTransferFunctions {
    fn get(&self, entry: JacobianEntry) -> Option<&RationalTransferFunction> {
        match entry {
            JacobianEntry::ThetaToP => self.p_theta.as_ref(),
            JacobianEntry::VToQ => self.q_v.as_ref(),
            JacobianEntry::VToP => self.p_v.as_ref(),
            JacobianEntry::ThetaToQ => self.q_theta.as_ref(),
        }
    }
}

/// A linear device seen only through its terminal response.
#[derive(Debug, Clone, PartialEq)]
pub enum BlackBoxDevice {
    /// Realized from one rational transfer function per channel.
    TransferFunctions(ChannelTransferFunctions),
    /// Droop-controlled source behind a coupling reactance, simulated from
    /// its block diagram (angle channel only).
    Droop(DroopParams),
}

impl BlackBoxDevice {
    /// Same gain on the `P/θ` and `Q/V` channels at every frequency.
    pub fn static_gain(k: f64) -> Self {
        let tf = RationalTransferFunction::gain(k);
        BlackBoxDevice::TransferFunctions(ChannelTransferFunctions {
            p_theta: Some(tf.clone()),
            q_v: Some(tf),
            ..Default::default()
        })
    }

    pub fn ideal_vsbi(params: &IdealVsbiParams) -> Result<Self> {
        let (pt, qv) = params.transfer_functions()?;
        Ok(BlackBoxDevice::TransferFunctions(ChannelTransferFunctions {
            p_theta: Some(pt),
            q_v: Some(qv),
            ..Default::default()
        }))
    }

    pub fn single(entry: JacobianEntry, tf: RationalTransferFunction) -> Self {
        let mut ch = ChannelTransferFunctions::default();
        match entry {
            JacobianEntry::ThetaToP => ch.p_theta = Some(tf),
            JacobianEntry::VToQ => ch.q_v = Some(tf),
            JacobianEntry::VToP => ch.p_v = Some(tf),
            JacobianEntry::ThetaToQ => ch.q_theta = Some(tf),
        }
        BlackBoxDevice::TransferFunctions(ch)
    }

    pub fn has(&self, entry: JacobianEntry) -> bool {
        match self {
            BlackBoxDevice::TransferFunctions(ch) => ch.get(entry).is_some(),
            BlackBoxDevice::Droop(_) => entry == JacobianEntry::ThetaToP,
        }
    }

    /// Time-domain realization of one channel.
    pub fn realization(&self, entry: JacobianEntry) -> Result<LinearSystem> {
        match self {
            BlackBoxDevice::TransferFunctions(ch) => {
                let tf = ch.get(entry).ok_or(Error::ChannelMissing(entry_name(entry)))?;
                LinearSystem::from_transfer_function(tf)
            }
            BlackBoxDevice::Droop(p) => {
                if entry != JacobianEntry::ThetaToP {
                    return Err(Error::ChannelMissing(entry_name(entry)));
                }
                p.validate()?;
                droop_block_diagram(p)
            }
        }
    }

    /// Analytic transfer function of a channel, where the model has one.
    pub fn analytic(&self, entry: JacobianEntry) -> Option<RationalTransferFunction> {
        match self {
            BlackBoxDevice::TransferFunctions(ch) => ch.get(entry).cloned(),
            BlackBoxDevice::Droop(p) if entry == JacobianEntry::ThetaToP => droop_p_theta(p).ok(),
            BlackBoxDevice::Droop(_) => None,
        }
    }

    /// Rejects devices whose realized channels are not asymptotically stable.
    pub fn ensure_stable(&self) -> Result<()> {
        for entry in ALL_ENTRIES {
            if self.has(entry) {
                let poles = self.realization(entry)?.poles();
                if poles.iter().any(|p| p.re >= 0.0) {
                    return Err(Error::Unstable { poles });
                }
            }
        }
        Ok(())
    }
}

const ALL_ENTRIES: [JacobianEntry; 4] =
    [JacobianEntry::ThetaToP, JacobianEntry::VToQ, JacobianEntry::VToP, JacobianEntry::ThetaToQ];

fn entry_name(entry: JacobianEntry) -> &'static str {
    match entry {
        JacobianEntry::ThetaToP => "p_theta",
        JacobianEntry::VToQ => "q_v",
        JacobianEntry::VToP => "p_v",
        JacobianEntry::ThetaToQ => "q_theta",
    }
}

impl FromStr for JacobianEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "theta_to_p" | "p_theta" => Ok(JacobianEntry::ThetaToP),
            "v_to_q" | "q_v" => Ok(JacobianEntry::VToQ),
            "v_to_p" | "p_v" => Ok(JacobianEntry::VToP),
            "theta_to_q" | "q_theta" => Ok(JacobianEntry::ThetaToQ),
            _ => Err(invalid(format!("unknown Jacobian entry `{s}`"))),
        }
    }
}

/// States `[θ_C, P_f]`, input `θ_POI`:
///
/// ```text
/// θ_C' = −D·P_f
/// P_f' = (P_m − P_f)/T_f,   P_m = (θ_C − θ_POI)/X
/// ```
///
/// The measured output is `P_m`.
fn droop_block_diagram(p: &DroopParams) -> Result<LinearSystem> {
    let DroopParams { droop_d: d, t_f, x_coup: x } = *p;
    LinearSystem::new(
        vec![0.0, -d, 1.0 / (x * t_f), -1.0 / t_f],
        vec![0.0, -1.0 / (x * t_f)],
        vec![1.0 / x, 0.0],
        -1.0 / x,
    )
}

/// Settings of a Jacobian scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Hz, strictly increasing
    pub frequencies: Vec<f64>,
    /// rad for angle perturbations, p.u. for magnitude perturbations
    pub amplitude: f64,
    /// Periods discarded before measuring. `None` selects 10 below 5 Hz and 5 above.
    pub settle_cycles: Option<u32>,
    pub measure_cycles: u32,
    /// Upper bound on the integration step, s. `None` means `1/(50·f_max)`.
    pub dt: Option<f64>,
    /// Test impedance between source and terminal; only 0 is supported.
    pub z_test: f64,
    /// Minimum settle time, s. `None` derives it from the slowest device transient.
    pub settle_time_s: Option<f64>,
    pub entries: Vec<JacobianEntry>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            frequencies: log_grid(0.5, 60.0, 40),
            amplitude: 0.01,
            settle_cycles: None,
            measure_cycles: 10,
            dt: None,
            z_test: 0.0,
            settle_time_s: None,
            entries: vec![JacobianEntry::ThetaToP, JacobianEntry::VToQ],
        }
    }
}

impl ScanConfig {
    pub fn with_frequencies(frequencies: Vec<f64>) -> Self {
        Self { frequencies, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.frequencies)?;
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("perturbation amplitude must be positive"));
        }
        if matches!(self.settle_cycles, Some(c) if c < 3) {
            return Err(invalid("settle_cycles must be at least 3"));
        }
        if self.measure_cycles < 5 {
            return Err(invalid("measure_cycles must be at least 5"));
        }
        let f_max = *self.frequencies.last().unwrap();
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt <= 1.0 / (50.0 * f_max)) {
                return Err(invalid(format!("dt must lie in (0, 1/(50·{f_max}) s]")));
            }
        }
        if self.z_test != 0.0 {
            return Err(invalid("only z_test = 0 (perturbation directly at the terminal) is supported"));
        }
        if matches!(self.settle_time_s, Some(t) if !(t >= 0.0)) {
            return Err(invalid("settle_time_s must be non-negative"));
        }
        if self.entries.is_empty() {
            return Err(invalid("no Jacobian entries requested"));
        }
        Ok(())
    }

    pub fn settle_cycles_at(&self, f: f64) -> u32 {
        self.settle_cycles.unwrap_or(if f < 5.0 { 10 } else { 5 })
    }

    fn max_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| 1.0 / (50.0 * self.frequencies.last().copied().unwrap_or(1.0)))
    }
}

/// Partial scan settings as read from a config file or the command line.
/// Later layers override earlier ones through [`ScanSettings::overlay`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    pub points: Option<usize>,
    /// explicit grid; takes precedence over the log-grid keys
    pub frequencies_hz: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub settle_cycles: Option<u32>,
    pub measure_cycles: Option<u32>,
    pub dt_s: Option<f64>,
    pub z_test: Option<f64>,
    pub settle_time_s: Option<f64>,
    pub entries: Option<Vec<JacobianEntry>>,
}

impl ScanSettings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: ScanSettings) -> ScanSettings {
        ScanSettings {
            f_min_hz: top.f_min_hz.or(self.f_min_hz),
            f_max_hz: top.f_max_hz.or(self.f_max_hz),
            points: top.points.or(self.points),
            frequencies_hz: top.frequencies_hz.or(self.frequencies_hz),
            amplitude: top.amplitude.or(self.amplitude),
            settle_cycles: top.settle_cycles.or(self.settle_cycles),
            measure_cycles: top.measure_cycles.or(self.measure_cycles),
            dt_s: top.dt_s.or(self.dt_s),
            z_test: top.z_test.or(self.z_test),
            settle_time_s: top.settle_time_s.or(self.settle_time_s),
            entries: top.entries.or(self.entries),
        }
    }

    pub fn resolve(&self) -> Result<ScanConfig> {
        let d = ScanConfig::default();
        let frequencies = match &self.frequencies_hz {
            Some(f) => f.clone(),
            None => {
                let lo = self.f_min_hz.unwrap_or(0.5);
                let hi = self.f_max_hz.unwrap_or(60.0);
                let n = self.points.unwrap_or(40);
                if !(lo > 0.0 && hi > lo) || n < 2 {
                    return Err(invalid("log grid needs 0 < f_min_hz < f_max_hz and points >= 2"));
                }
                log_grid(lo, hi, n)
            }
        };
        let cfg = ScanConfig {
            frequencies,
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            settle_cycles: self.settle_cycles.or(d.settle_cycles),
            measure_cycles: self.measure_cycles.unwrap_or(d.measure_cycles),
            dt: self.dt_s.or(d.dt),
            z_test: self.z_test.unwrap_or(d.z_test),
            settle_time_s: self.settle_time_s.or(d.settle_time_s),
            entries: self.entries.clone().unwrap_or(d.entries),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Settle time implied by the slowest pole of a realization.
fn transient_settle_time(sys: &LinearSystem) -> Result<f64> {
    let poles = sys.poles();
    if poles.iter().any(|p| p.re >= 0.0) {
        return Err(Error::Unstable { poles });
    }
    let slowest = poles.iter().map(|p| -p.re).fold(f64::INFINITY, f64::min);
    Ok(if slowest.is_finite() { SETTLE_TIME_CONSTANTS / slowest } else { 0.0 })
}

fn fastest_pole(sys: &LinearSystem) -> f64 {
    sys.poles().iter().map(|p| p.norm()).fold(0.0, f64::max)
}

/// Raw tone measurement on an already-built realization.
struct ToneRun<'a> {
    sys: &'a LinearSystem,
    settle_time: f64,
    fastest: f64,
}

impl ToneRun<'_> {
    fn new<'a>(sys: &'a LinearSystem, cfg: &ScanConfig) -> Result<ToneRun<'a>> {
        let hint = transient_settle_time(sys)?;
        Ok(ToneRun { sys, settle_time: cfg.settle_time_s.unwrap_or(hint), fastest: fastest_pole(sys) })
    }

    fn measure(&self, f: f64, amplitude: f64, cfg: &ScanConfig) -> Result<Complex64> {
        let period = 1.0 / f;
        let mut dt_max = cfg.max_dt().min(period / MIN_SAMPLES_PER_PERIOD as f64);
        if self.fastest > 0.0 {
            dt_max = dt_max.min(MAX_POLE_STEP / self.fastest);
        }
        let n_per = (period / dt_max).ceil() as usize;
        let dt = period / n_per as f64;
        let settle_periods = (cfg.settle_cycles_at(f) as usize).max((self.settle_time / period).ceil() as usize);
        let measure = cfg.measure_cycles as usize;
        let total = (settle_periods + measure) * n_per;
        let w = 2.0 * PI * f;
        let y = self.sys.simulate(|t| amplitude * (w * t).sin(), dt, total);
        let tail = &y[settle_periods * n_per..total];
        correlate(tail, n_per, amplitude).map_err(|detail| Error::Convergence { freq_hz: f, detail })
    }
}

/// Whole-period sine/cosine correlation of `y`, which starts at a zero phase
/// of the excitation and spans an integer number of periods of `n_per`
/// samples. Returns `(I + jQ)/A`.
fn correlate(y: &[f64], n_per: usize, amplitude: f64) -> std::result::Result<Complex64, String> {
    let periods = y.len() / n_per;
    let (sin_t, cos_t): (Vec<f64>, Vec<f64>) =
        (0..n_per).map(|k| (2.0 * PI * k as f64 / n_per as f64).sin_cos()).unzip();
    let (mut i_sum, mut q_sum) = (0.0, 0.0);
    let mut rms = Vec::with_capacity(periods);
    for chunk in y.chunks_exact(n_per) {
        let mean = chunk.iter().sum::<f64>() / n_per as f64;
        rms.push((chunk.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_per as f64).sqrt());
        for k in 0..n_per {
            i_sum += chunk[k] * sin_t[k];
            q_sum += chunk[k] * cos_t[k];
        }
    }
    let (lo, hi) = rms.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if hi > 0.0 && (hi - lo) / hi > STATIONARITY_TOL {
        return Err(format!("response not stationary: period RMS varies by {:.3} %", 100.0 * (hi - lo) / hi));
    }
    let norm = 2.0 / (periods * n_per) as f64;
    Ok(Complex64::new(i_sum * norm, q_sum * norm) / amplitude)
}

/// Complex gain of one Jacobian entry at `f`, from a single-tone perturbation.
pub fn sine_perturb_extract(
    device: &BlackBoxDevice,
    entry: JacobianEntry,
    f: f64,
    cfg: &ScanConfig,
) -> Result<Complex64> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(invalid("perturbation frequency must be positive"));
    }
    let sys = device.realization(entry)?;
    ToneRun::new(&sys, cfg)?.measure(f, cfg.amplitude, cfg)
}

/// Relative change of the extracted gain when the amplitude is scaled by `factor`.
pub fn linearity_deviation(
    device: &BlackBoxDevice,
    entry: JacobianEntry,
    f: f64,
    cfg: &ScanConfig,
    factor: f64,
) -> Result<f64> {
    let g1 = sine_perturb_extract(device, entry, f, cfg)?;
    let scaled = ScanConfig { amplitude: cfg.amplitude * factor, ..cfg.clone() };
    let g2 = sine_perturb_extract(device, entry, f, &scaled)?;
    Ok((g2 - g1).norm() / g1.norm().max(f64::MIN_POSITIVE))
}

/// A grid frequency dropped from a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub freq_hz: f64,
    pub message: String,
}

/// A completed scan and any frequencies it had to drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRun {
    pub scan: JacobianScan,
    pub failures: Vec<PointFailure>,
}

/// Scans every requested entry the device exposes over the configured grid.
///
/// Frequencies are measured concurrently and assembled in grid order, so the
/// result does not depend on scheduling. A frequency that fails on any entry
/// is dropped and recorded; three consecutive failures abort the scan.
pub fn run_jacobian_scan(device: &BlackBoxDevice, cfg: &ScanConfig) -> Result<ScanRun> {
    cfg.validate()?;
    let entries: Vec<JacobianEntry> = cfg.entries.iter().copied().filter(|e| device.has(*e)).collect();
    if !entries.iter().any(|e| matches!(e, JacobianEntry::ThetaToP | JacobianEntry::VToQ)) {
        return Err(Error::ChannelMissing("p_theta or q_v"));
    }
    let systems = entries.iter().map(|&e| device.realization(e)).collect::<Result<Vec<_>>>()?;
    let runs = systems.iter().map(|s| ToneRun::new(s, cfg)).collect::<Result<Vec<_>>>()?;

    let freqs = &cfg.frequencies;
    let point = |f: f64| -> Result<Vec<Complex64>> { runs.iter().map(|r| r.measure(f, cfg.amplitude, cfg)).collect() };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(freqs.len());
    let mut results: Vec<Option<Result<Vec<Complex64>>>> = (0..freqs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = freqs.len().div_ceil(workers);
        for (fs, out) in freqs.chunks(chunk).zip(results.chunks_mut(chunk)) {
            let point = &point;
            scope.spawn(move || {
                for (f, slot) in fs.iter().zip(out.iter_mut()) {
                    *slot = Some(point(*f));
                }
            });
        }
    });

    let mut kept_f = Vec::new();
    let mut kept: Vec<Vec<Complex64>> = vec![Vec::new(); entries.len()];
    let mut failures = Vec::new();
    let mut streak = 0;
    for (&f, res) in freqs.iter().zip(results) {
        match res.expect("every grid point is evaluated") {
            Ok(values) => {
                streak = 0;
                kept_f.push(f);
                for (col, v) in kept.iter_mut().zip(values) {
                    col.push(v);
                }
            }
            Err(e) => {
                streak += 1;
                if streak >= MAX_CONSECUTIVE_FAILURES {
                    return Err(Error::ScanAborted { freq_hz: f, source: Box::new(e) });
                }
                failures.push(PointFailure { freq_hz: f, message: e.to_string() });
            }
        }
    }
    if kept_f.is_empty() {
        return Err(invalid("every scan frequency failed"));
    }
    let mut cols: [Option<Vec<Complex64>>; 4] = Default::default();
    for (e, col) in entries.iter().zip(kept) {
        let idx = ALL_ENTRIES.iter().position(|x| x == e).unwrap();
        cols[idx] = Some(col);
    }
    let [pt, qv, pv, qt] = cols;
    Ok(ScanRun { scan: JacobianScan::new(kept_f, pt, qv, pv, qt)?, failures })
}

/// Transfer-function coefficients as written in device files, highest power first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfSpec {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

impl TfSpec {
    pub fn build(&self) -> Result<RationalTransferFunction> {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        RationalTransferFunction::from_coeffs(&rev(&self.numerator), &rev(&self.denominator))
    }
}

/// Device description file, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeviceSpec {
    Droop {
        droop_d: f64,
        t_f: f64,
        x_coup: f64,
    },
    TransferFunction {
        p_theta: Option<TfSpec>,
        q_v: Option<TfSpec>,
        p_v: Option<TfSpec>,
        q_theta: Option<TfSpec>,
    },
    StaticGain {
        gain: f64,
    },
    IdealVsbi {
        r: f64,
        /// reactance at nominal frequency, p.u.; the inductance is `x / ω₀`
        x: f64,
        #[serde(default = "default_f0")]
        f0_hz: f64,
        #[serde(default)]
        p0: f64,
        #[serde(default)]
        q0: f64,
        #[serde(default = "default_v0")]
        v0: f64,
        #[serde(default)]
        scaling: PowerScaling,
    },
}

fn default_f0() -> f64 {
    60.0
}

fn default_v0() -> f64 {
    1.0
}

impl DeviceSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Builds and stability-checks the device.
    pub fn build(&self) -> Result<BlackBoxDevice> {
        let device = match self {
            DeviceSpec::Droop { droop_d, t_f, x_coup } => {
                let p = DroopParams { droop_d: *droop_d, t_f: *t_f, x_coup: *x_coup };
                p.validate()?;
                BlackBoxDevice::Droop(p)
            }
            DeviceSpec::TransferFunction { p_theta, q_v, p_v, q_theta } => {
                let b = |t: &Option<TfSpec>| t.as_ref().map(TfSpec::build).transpose();
                let ch =
                    ChannelTransferFunctions { p_theta: b(p_theta)?, q_v: b(q_v)?, p_v: b(p_v)?, q_theta: b(q_theta)? };
                if ch.p_theta.is_none() && ch.q_v.is_none() {
                    return Err(invalid("device needs a p_theta or q_v transfer function"));
                }
                BlackBoxDevice::TransferFunctions(ch)
            }
            DeviceSpec::StaticGain { gain } => BlackBoxDevice::static_gain(*gain),
            DeviceSpec::IdealVsbi { r, x, f0_hz, p0, q0, v0, scaling } => {
                let omega_0 = 2.0 * PI * f0_hz;
                if !(*x > 0.0) {
                    return Err(invalid("x must be positive"));
                }
                let params = IdealVsbiParams {
                    r: *r,
                    l: x / omega_0,
                    op: OperatingPoint::new(*p0, *q0, *v0, omega_0)?,
                    scaling: *scaling,
                };
                BlackBoxDevice::ideal_vsbi(&params)?
            }
        };
        device.ensure_stable()?;
        Ok(device)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::freq_response;

    fn quick(freqs: Vec<f64>) -> ScanConfig {
        ScanConfig::with_frequencies(freqs)
    }

    #[test]
    fn static_gain_is_exact() {
        let dev = BlackBoxDevice::static_gain(2.5);
        let g = sine_perturb_extract(&dev, JacobianEntry::VToQ, 3.0, &quick(vec![3.0])).unwrap();
        assert!((g.norm() - 2.5).abs() < 1e-12);
        assert!(g.arg().abs() < 1e-6);
    }

    #[test]
    fn correlation_of_pure_tone_is_leakage_free() {
        let n_per = 37;
        let amp = 0.7;
        let y: Vec<f64> =
            (0..n_per * 6).map(|k| 3.0 * amp * (2.0 * PI * k as f64 / n_per as f64 + 0.4).sin()).collect();
        let g = correlate(&y, n_per, amp).unwrap();
        assert!((g.norm() - 3.0).abs() < 1e-9);
        assert!((g.arg() - 0.4).abs() < 1e-9);
    }

    #[test]
    fn non_stationary_response_is_rejected() {
        let n_per = 50;
        let y: Vec<f64> =
            (0..n_per * 5).map(|k| (1.0 + 0.01 * k as f64) * (2.0 * PI * k as f64 / n_per as f64).sin()).collect();
        assert!(correlate(&y, n_per, 1.0).is_err());
    }

    #[test]
    fn droop_block_diagram_matches_closed_form() {
        let p = DroopParams { droop_d: 0.05, t_f: 0.05, x_coup: 0.2 };
        let dev = BlackBoxDevice::Droop(p);
        let f = 30.0;
        let g = sine_perturb_extract(&dev, JacobianEntry::ThetaToP, f, &quick(vec![f])).unwrap();
        let h = freq_response(&droop_p_theta(&p).unwrap(), &[f]).unwrap().values()[0];
        assert!((g.norm() / h.norm() - 1.0).abs() < 0.005);
        assert!((g.arg() - h.arg()).abs().to_degrees() < 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(quick(vec![]).validate().is_err());
        assert!(ScanConfig { z_test: 0.1, ..quick(vec![1.0]) }.validate().is_err());
        assert!(ScanConfig { dt: Some(1e-2), ..quick(vec![10.0]) }.validate().is_err());
        assert!(ScanConfig { measure_cycles: 4, ..quick(vec![1.0]) }.validate().is_err());
        assert!(ScanConfig { settle_cycles: Some(2), ..quick(vec![1.0]) }.validate().is_err());
        assert_eq!(quick(vec![1.0]).settle_cycles_at(1.0), 10);
        assert_eq!(quick(vec![1.0]).settle_cycles_at(7.0), 5);
    }

    #[test]
    fn settings_precedence() {
        let file =
            ScanSettings::from_toml_str("amplitude = 0.02\npoints = 12\nf_min_hz = 1.0\nf_max_hz = 30.0\n").unwrap();
        let flags = ScanSettings { amplitude: Some(0.005), ..Default::default() };
        let cfg = file.overlay(flags).resolve().unwrap();
        assert_eq!(cfg.amplitude, 0.005);
        assert_eq!(cfg.frequencies.len(), 12);
        assert!(ScanSettings::from_toml_str("amplitud = 1").is_err());
    }

    #[test]
    fn device_specs() {
        let d = DeviceSpec::from_toml_str("kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.05\nx_coup = 0.2\n").unwrap();
        assert!(matches!(d.build().unwrap(), BlackBoxDevice::Droop(_)));
        let bad = DeviceSpec::from_toml_str("kind = \"droop\"\ndroop_d = 0.05\nt_f = 0.05\nx_coup = 0.0\n").unwrap();
        assert!(bad.build().is_err());
        let unstable = DeviceSpec::from_toml_str(
            "kind = \"transfer-function\"\n[p_theta]\nnumerator = [1.0]\ndenominator = [1.0, -2.0]\n",
        )
        .unwrap();
        assert!(matches!(unstable.build(), Err(Error::Unstable { .. })));
    }

    #[test]
    fn failures_abort_after_three_in_a_row() {
        // lightly damped 10 Hz resonance measured before it has rung down
        let w = 2.0 * PI * 10.0;
        let tf = RationalTransferFunction::from_coeffs(&[w * w], &[w * w, 0.002 * w, 1.0]).unwrap();
        let dev = BlackBoxDevice::single(JacobianEntry::ThetaToP, tf);
        let cfg = ScanConfig { settle_time_s: Some(0.0), settle_cycles: Some(3), ..quick(vec![6.0, 7.0, 8.0, 9.0]) };
        let err = run_jacobian_scan(&dev, &cfg).unwrap_err();
        assert!(matches!(err, Error::ScanAborted { freq_hz, .. } if freq_hz == 8.0), "{err}");
    }

    #[test]
    fn unstable_channel_is_rejected() {
        let tf = RationalTransferFunction::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap();
        let dev = BlackBoxDevice::single(JacobianEntry::ThetaToP, tf);
        assert!(matches!(run_jacobian_scan(&dev, &quick(vec![1.0])), Err(Error::Unstable { .. })));
    }
}
