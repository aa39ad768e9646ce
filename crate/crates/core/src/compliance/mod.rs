//! Compliance verdicts and the time/frequency equivalence cross-check.

mod report;
mod svg;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use report::{read_points_csv, render_report, ReportDocument, ReportFormat};
pub use svg::{render_envelope_svg, render_svg};

use crate::envelope::{build_envelope, Channel, ComplianceEnvelope, EnvelopeOptions, TimeDomainCriteria};
use crate::error::invalid;
use crate::io::log_grid;
use crate::jacobian::{JacobianEntry, JacobianScan};
use crate::lti::{
    decay_time_zero_crossing, freq_response, measurement_horizon, peak_value, rise_time_between, settled_final_value,
    step_response, suggested_dt, time_to_fraction, RationalTransferFunction,
};
use crate::{Error, Result};

/// Minimum number of scan points inside the band for a conclusive verdict.
pub const MIN_POINTS_IN_BAND: usize = 10;
/// Allowed relative gap between the band edges and the outermost in-band points.
pub const EDGE_COVERAGE: f64 = 0.10;
/// Round-off allowance on margins, dB. Keeps exact equality on the PASS side.
pub const MARGIN_ROUNDOFF_DB: f64 = 1e-9;
/// Relative slack on time-domain comparisons, for the same reason.
pub const TD_ROUNDOFF: f64 = 1e-6;
/// Relative slack on the band edges, so that edge frequencies survive a
/// `%.12e` round trip through a scan file.
pub const BAND_EDGE_ROUNDOFF: f64 = 1e-9;
/// Frequency-response points used by the cross-check.
pub const CROSSCHECK_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Incomplete,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Incomplete => "INCOMPLETE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One scan frequency inside the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMargin {
    pub f_hz: f64,
    pub scan_magnitude: f64,
    pub envelope_minimum: f64,
    /// `20·log10(scan / envelope)`
    pub margin_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub channel: Channel,
    pub verdict: Verdict,
    pub band_hz: [f64; 2],
    pub per_point: Vec<PointMargin>,
    pub worst_margin_db: Option<f64>,
    pub worst_frequency_hz: Option<f64>,
    pub coverage_ok: bool,
    pub tolerance_db: f64,
}

impl ComplianceReport {
    pub fn violations(&self) -> impl Iterator<Item = &PointMargin> {
        let limit = -self.tolerance_db - MARGIN_ROUNDOFF_DB;
        self.per_point.iter().filter(move |p| p.margin_db < limit)
    }
}

pub(crate) fn channel_entry(channel: Channel) -> JacobianEntry {
    match channel {
        Channel::PTheta => JacobianEntry::ThetaToP,
        Channel::QV => JacobianEntry::VToQ,
    }
}

/// Compares scan magnitudes against the envelope at every scan frequency
/// inside `[f_lo, f_hi]`. The envelope is evaluated from its boundary
/// filters, never interpolated.
pub fn check_compliance(scan: &JacobianScan, env: &ComplianceEnvelope, tolerance_db: f64) -> Result<ComplianceReport> {
    if !(tolerance_db >= 0.0 && tolerance_db.is_finite()) {
        return Err(invalid("tolerance_db must be a non-negative number"));
    }
    let values = scan.entry(channel_entry(env.channel)).ok_or(Error::ChannelMissing(match env.channel {
        Channel::PTheta => "p_theta",
        Channel::QV => "q_v",
    }))?;
    let per_point: Vec<PointMargin> = scan
        .frequencies
        .iter()
        .zip(values)
        .filter(|(f, _)| **f >= env.f_lo * (1.0 - BAND_EDGE_ROUNDOFF) && **f <= env.f_hi * (1.0 + BAND_EDGE_ROUNDOFF))
        .map(|(&f, v)| {
            let scan_magnitude = v.norm();
            let envelope_minimum = env.magnitude_unchecked(f);
            PointMargin {
                f_hz: f,
                scan_magnitude,
                envelope_minimum,
                margin_db: 20.0 * (scan_magnitude / envelope_minimum).log10(),
            }
        })
        .collect();

    let coverage_ok = per_point.len() >= MIN_POINTS_IN_BAND
        && per_point.first().is_some_and(|p| p.f_hz <= env.f_lo * (1.0 + EDGE_COVERAGE))
        && per_point.last().is_some_and(|p| p.f_hz >= env.f_hi * (1.0 - EDGE_COVERAGE));
    let worst =
        per_point.iter().min_by(|a, b| a.margin_db.partial_cmp(&b.margin_db).unwrap_or(std::cmp::Ordering::Equal));
    let mut report = ComplianceReport {
        channel: env.channel,
        verdict: Verdict::Pass,
        band_hz: [env.f_lo, env.f_hi],
        worst_margin_db: worst.map(|p| p.margin_db),
        worst_frequency_hz: worst.map(|p| p.f_hz),
        per_point: Vec::new(),
        coverage_ok,
        tolerance_db,
    };
    report.per_point = per_point;
    report.verdict = if !coverage_ok {
        Verdict::Incomplete
    } else if report.violations().next().is_some() {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(report)
}

/// Decay time of a step response: the first return to the pre-disturbance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayTime {
    Seconds(f64),
    Never,
}

impl Serialize for DecayTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DecayTime::Seconds(t) => s.serialize_f64(*t),
            DecayTime::Never => s.serialize_str("never"),
        }
    }
}

impl fmt::Display for DecayTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayTime::Seconds(t) => write!(f, "{:.4} ms", t * 1e3),
            DecayTime::Never => f.write_str("never"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub channel: Channel,
    /// 10 % → 90 % rise time, s; `None` when the response never gets there
    pub rise_time_s: Option<f64>,
    /// time from the step to 90 % of the same reference, s
    pub rise_time_0_90_s: Option<f64>,
    /// signed peak deviation, channel units
    pub peak: f64,
    pub decay_time: DecayTime,
    pub rise_ok: bool,
    pub peak_ok: bool,
    pub decay_ok: bool,
    pub td_verdict: Verdict,
    pub fd_verdict: Verdict,
    pub fd_worst_margin_db: Option<f64>,
    pub consistent: bool,
}

/// Simulates a unit step through `device_tf`, judges it against the
/// time-domain criteria directly, and judges its analytic frequency response
/// against the envelope built from the same criteria.
///
/// The rise is measured against the settled final value when the response
/// settles away from zero, otherwise against its peak.
pub fn time_domain_crosscheck(
    device_tf: &RationalTransferFunction,
    criteria: &TimeDomainCriteria,
    options: &EnvelopeOptions,
) -> Result<EquivalenceReport> {
    device_tf.ensure_stable()?;
    let env = build_envelope(criteria, options)?;

    let mut horizon = measurement_horizon(device_tf).max(10.0 * criteria.rise_time_max);
    if let Some(td) = criteria.decay_time_min {
        horizon = horizon.max(2.0 * td);
    }
    let dt = suggested_dt(device_tf).min(criteria.rise_time_max / 2000.0).max(horizon / 2.0e6).min(horizon / 100.0);
    let series = step_response(device_tf, horizon, dt)?;

    let peak = peak_value(&series, 0.0);
    let reference = settled_final_value(&series, 0.0).unwrap_or(peak);
    let rise_time_s = if reference != 0.0 { rise_time_between(&series, 0.0, reference).ok() } else { None };
    let rise_time_0_90_s = if reference != 0.0 { time_to_fraction(&series, 0.0, reference, 0.9) } else { None };
    let decay_time = match decay_time_zero_crossing(&series, 0.0) {
        Some(t) => DecayTime::Seconds(t),
        None => DecayTime::Never,
    };

    let rise_ok = rise_time_s.is_some_and(|t| t <= criteria.rise_time_max * (1.0 + TD_ROUNDOFF));
    let peak_ok = peak.abs() >= criteria.peak_min * (1.0 - TD_ROUNDOFF);
    let decay_ok = match (criteria.decay_time_min, decay_time) {
        (None, _) | (Some(_), DecayTime::Never) => true,
        (Some(min), DecayTime::Seconds(t)) => t >= min * (1.0 - TD_ROUNDOFF),
    };
    let td_verdict = if rise_ok && peak_ok && decay_ok { Verdict::Pass } else { Verdict::Fail };

    let grid = log_grid(env.f_lo, env.f_hi, CROSSCHECK_POINTS);
    let fr = freq_response(device_tf, &grid)?;
    let values = Some(fr.values().to_vec());
    let scan = match criteria.channel {
        Channel::PTheta => JacobianScan::new(grid, values, None, None, None)?,
        Channel::QV => JacobianScan::new(grid, None, values, None, None)?,
    };
    let fd = check_compliance(&scan, &env, 0.0)?;

    Ok(EquivalenceReport {
        channel: criteria.channel,
        rise_time_s,
        rise_time_0_90_s,
        peak,
        decay_time,
        rise_ok,
        peak_ok,
        decay_ok,
        td_verdict,
        fd_verdict: fd.verdict,
        fd_worst_margin_db: fd.worst_margin_db,
        consistent: td_verdict == fd.verdict,
    })
}
