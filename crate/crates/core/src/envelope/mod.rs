//! Minimum Bode-magnitude compliance envelopes.
//!
//! A time-domain criterion (maximum rise time, minimum peak, optional minimum
//! decay time) maps onto two boundary sections: a critically compliant
//! second-order low-pass that bounds the fast response from below at higher
//! frequencies, and a second-order high-pass that bounds the slow decay at
//! lower frequencies. The envelope follows the high-pass from its −3 dB
//! frequency up to where the two magnitudes meet, then the low-pass up to its
//! own −3 dB frequency.

mod entsoe;
mod presets;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use entsoe::{entsoe_decay_tau, entsoe_peak_current, EntsoeParams};
pub use presets::{preset, Preset};

use crate::error::invalid;
use crate::io::{fmt_e12, log_grid};
use crate::lti::{
    bandwidth_hpf, bandwidth_lpf, omega_from_decay_time, omega_from_rise_time, DecayModel, RationalTransferFunction,
    SecondOrderParams,
};
use crate::{Error, Result};

/// Which Jacobian entry a criterion constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `P(s)/θ(s)`, p.u. per radian.
    #[serde(rename = "P_over_theta")]
    PTheta,
    /// `Q(s)/V(s)`, p.u. per p.u.
    #[serde(rename = "Q_over_V")]
    QV,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::PTheta => "P_over_theta",
            Channel::QV => "Q_over_V",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Channel::PTheta => "p.u./rad",
            Channel::QV => "p.u./p.u.",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "p-over-theta" | "p-theta" | "ptheta" | "p" => Ok(Channel::PTheta),
            "q-over-v" | "q-v" | "qv" | "q" => Ok(Channel::QV),
            _ => Err(invalid(format!("unknown channel `{s}`"))),
        }
    }
}

/// Operator time-domain requirement for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainCriteria {
    pub channel: Channel,
    /// seconds
    pub rise_time_max: f64,
    /// channel units
    pub peak_min: f64,
    /// seconds; the response must not return to its pre-disturbance value sooner
    pub decay_time_min: Option<f64>,
    #[serde(default = "one")]
    pub zeta_lpf: f64,
    #[serde(default = "one")]
    pub zeta_hpf: f64,
}

fn one() -> f64 {
    1.0
}

impl TimeDomainCriteria {
    pub fn new(channel: Channel, rise_time_max: f64, peak_min: f64, decay_time_min: Option<f64>) -> Self {
        Self { channel, rise_time_max, peak_min, decay_time_min, zeta_lpf: 1.0, zeta_hpf: 1.0 }
    }

    pub fn with_zetas(mut self, zeta_lpf: f64, zeta_hpf: f64) -> Self {
        self.zeta_lpf = zeta_lpf;
        self.zeta_hpf = zeta_hpf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rise_time_max > 0.0 && self.rise_time_max.is_finite()) {
            return Err(invalid("rise_time_max must be positive"));
        }
        if !(self.peak_min > 0.0 && self.peak_min.is_finite()) {
            return Err(invalid("peak_min must be positive"));
        }
        if let Some(td) = self.decay_time_min {
            if !(td > self.rise_time_max && td.is_finite()) {
                return Err(invalid("decay_time_min must exceed rise_time_max"));
            }
        }
        for (name, z) in [("zeta_lpf", self.zeta_lpf), ("zeta_hpf", self.zeta_hpf)] {
            if !(z > 0.0 && z <= 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1], got {z}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    #[serde(rename = "LPF")]
    LowPass,
    #[serde(rename = "HPF")]
    HighPass,
}

impl FilterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::LowPass => "LPF",
            FilterKind::HighPass => "HPF",
        }
    }
}

/// A boundary section: its parameters, transfer function and −3 dB frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFilter {
    pub kind: FilterKind,
    pub params: SecondOrderParams,
    pub tf: RationalTransferFunction,
    pub bandwidth_hz: f64,
}

impl BoundaryFilter {
    pub fn magnitude_hz(&self, f: f64) -> f64 {
        self.tf.magnitude_hz(f).expect("boundary sections have no poles on the imaginary axis")
    }
}

/// Low-pass boundary: `ω_n` from the empirical rise-time relation, DC gain
/// equal to the minimum peak.
pub fn build_lpf_boundary(rise_time_max: f64, peak_min: f64, zeta: f64) -> Result<BoundaryFilter> {
    if !(peak_min > 0.0) {
        return Err(invalid("peak_min must be positive"));
    }
    let omega_n = omega_from_rise_time(rise_time_max, zeta)?;
    let params = SecondOrderParams::new(zeta, omega_n, peak_min)?;
    Ok(BoundaryFilter {
        kind: FilterKind::LowPass,
        tf: params.low_pass(),
        bandwidth_hz: bandwidth_lpf(zeta, omega_n)?,
        params,
    })
}

/// High-pass boundary: `ω_n` from the decay-time relation, high-frequency
/// gain equal to the minimum peak.
pub fn build_hpf_boundary(decay_time_min: f64, peak_min: f64, zeta: f64, model: DecayModel) -> Result<BoundaryFilter> {
    if !(peak_min > 0.0) {
        return Err(invalid("peak_min must be positive"));
    }
    let omega_n = omega_from_decay_time(decay_time_min, zeta, model)?;
    let params = SecondOrderParams::new(zeta, omega_n, peak_min)?;
    Ok(BoundaryFilter {
        kind: FilterKind::HighPass,
        tf: params.high_pass(),
        bandwidth_hz: bandwidth_hpf(zeta, omega_n)?,
        params,
    })
}

/// Frequency where `|LP| = |HP|`, by bisection in log-frequency between the
/// two −3 dB frequencies (relative tolerance 1e-6).
pub fn intersection_frequency(lpf: &BoundaryFilter, hpf: &BoundaryFilter) -> Result<f64> {
    let (lo, hi) = if hpf.bandwidth_hz <= lpf.bandwidth_hz {
        (hpf.bandwidth_hz, lpf.bandwidth_hz)
    } else {
        (lpf.bandwidth_hz, hpf.bandwidth_hz)
    };
    let gap = |f: f64| lpf.magnitude_hz(f) - hpf.magnitude_hz(f);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoIntersection { lo_hz: lo, hi_hz: hi });
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let sign_a = g_lo.signum();
    while (b - a) > 1e-7 {
        let m = 0.5 * (a + b);
        let g = gap(m.exp());
        if g == 0.0 {
            return Ok(m.exp());
        }
        if g.signum() == sign_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Knobs for envelope construction that the operator texts leave open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    /// Lower band edge for envelopes with no decay requirement, hertz.
    pub lp_only_floor_hz: f64,
    pub decay_model: DecayModel,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { lp_only_floor_hz: 1.0, decay_model: DecayModel::Analytic }
    }
}

/// Which boundary section governs a point of the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "HPF")]
    HighPass,
    #[serde(rename = "LPF")]
    LowPass,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::HighPass => "HPF",
            Branch::LowPass => "LPF",
        }
    }
}

/// Piecewise minimum-magnitude bound over `[f_lo, f_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceEnvelope {
    pub channel: Channel,
    pub criteria: TimeDomainCriteria,
    pub hpf: Option<BoundaryFilter>,
    pub lpf: BoundaryFilter,
    pub f_lo: f64,
    pub f_int: Option<f64>,
    pub f_hi: f64,
    pub decay_model: DecayModel,
}

/// Builds the envelope for a criterion. A high-pass branch exists exactly
/// when the criterion carries a decay requirement.
pub fn build_envelope(criteria: &TimeDomainCriteria, options: &EnvelopeOptions) -> Result<ComplianceEnvelope> {
    criteria.validate()?;
    let lpf = build_lpf_boundary(criteria.rise_time_max, criteria.peak_min, criteria.zeta_lpf)?;
    let f_hi = lpf.bandwidth_hz;
    let (hpf, f_lo, f_int) = match criteria.decay_time_min {
        Some(td) => {
            let hpf = build_hpf_boundary(td, criteria.peak_min, criteria.zeta_hpf, options.decay_model)?;
            if hpf.bandwidth_hz >= f_hi {
                return Err(invalid(format!(
                    "high-pass bandwidth {:.4} Hz is not below low-pass bandwidth {:.4} Hz",
                    hpf.bandwidth_hz, f_hi
                )));
            }
            let f_int = intersection_frequency(&lpf, &hpf)?;
            let f_lo = hpf.bandwidth_hz;
            (Some(hpf), f_lo, Some(f_int))
        }
        None => {
            if !(options.lp_only_floor_hz > 0.0 && options.lp_only_floor_hz < f_hi) {
                return Err(invalid(format!(
                    "envelope floor {} Hz must be positive and below {:.4} Hz",
                    options.lp_only_floor_hz, f_hi
                )));
            }
            (None, options.lp_only_floor_hz, None)
        }
    };
    Ok(ComplianceEnvelope {
        channel: criteria.channel,
        criteria: *criteria,
        hpf,
        lpf,
        f_lo,
        f_int,
        f_hi,
        decay_model: options.decay_model,
    })
}

impl ComplianceEnvelope {
    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_lo && f <= self.f_hi
    }

    pub fn branch_at(&self, f: f64) -> Branch {
        match (&self.hpf, self.f_int) {
            (Some(_), Some(fi)) if f < fi => Branch::HighPass,
            _ => Branch::LowPass,
        }
    }

    /// Envelope magnitude without the band check.
    pub fn magnitude_unchecked(&self, f: f64) -> f64 {
        match (self.branch_at(f), &self.hpf) {
            (Branch::HighPass, Some(hpf)) => hpf.magnitude_hz(f),
            _ => self.lpf.magnitude_hz(f),
        }
    }

    /// Minimum required magnitude at `f`, which must lie inside the band.
    pub fn min_magnitude(&self, f: f64) -> Result<f64> {
        if !self.contains(f) {
            return Err(Error::OutOfBand { freq_hz: f, lo_hz: self.f_lo, hi_hz: self.f_hi });
        }
        Ok(self.magnitude_unchecked(f))
    }

    /// `n` log-spaced samples across the band. The switch frequency is
    /// inserted so both branches meet on the grid.
    pub fn sample(&self, n: usize) -> Vec<EnvelopePoint> {
        let mut grid = log_grid(self.f_lo, self.f_hi, n.max(2));
        if let Some(fi) = self.f_int {
            if !grid.contains(&fi) {
                grid.push(fi);
                grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
        }
        grid.into_iter()
            .map(|f| EnvelopePoint { f_hz: f, min_magnitude: self.magnitude_unchecked(f), branch: self.branch_at(f) })
            .collect()
    }

    /// CSV with header `f_hz,min_magnitude,branch`.
    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("f_hz,min_magnitude,branch\n");
        for p in self.sample(n) {
            out.push_str(&format!("{},{},{}\n", fmt_e12(p.f_hz), fmt_e12(p.min_magnitude), p.branch.as_str()));
        }
        out
    }

    pub fn metadata(&self) -> EnvelopeMetadata {
        EnvelopeMetadata {
            channel: self.channel,
            units: self.channel.units().to_string(),
            criteria: self.criteria,
            decay_model: self.decay_model,
            lpf: BranchMetadata::from(&self.lpf),
            hpf: self.hpf.as_ref().map(BranchMetadata::from),
            f_lo_hz: self.f_lo,
            f_int_hz: self.f_int,
            f_hi_hz: self.f_hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub f_hz: f64,
    pub min_magnitude: f64,
    pub branch: Branch,
}

/// Key/value description of an envelope, written next to its CSV samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeMetadata {
    pub channel: Channel,
    pub units: String,
    pub criteria: TimeDomainCriteria,
    pub decay_model: DecayModel,
    pub lpf: BranchMetadata,
    pub hpf: Option<BranchMetadata>,
    pub f_lo_hz: f64,
    pub f_int_hz: Option<f64>,
    pub f_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMetadata {
    pub kind: FilterKind,
    pub zeta: f64,
    pub omega_n_rad_s: f64,
    pub gain: f64,
    pub bandwidth_hz: f64,
    /// ascending powers of s
    pub numerator: Vec<f64>,
    /// ascending powers of s
    pub denominator: Vec<f64>,
}

impl From<&BoundaryFilter> for BranchMetadata {
    fn from(b: &BoundaryFilter) -> Self {
        Self {
            kind: b.kind,
            zeta: b.params.zeta,
            omega_n_rad_s: b.params.omega_n,
            gain: b.params.gain,
            bandwidth_hz: b.bandwidth_hz,
            numerator: b.tf.numerator().coefficients().to_vec(),
            denominator: b.tf.denominator().coefficients().to_vec(),
        }
    }
}
