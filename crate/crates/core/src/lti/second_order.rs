//! Standard second-order low-pass and high-pass sections and the empirical
//! rise/decay-time relations used to size them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Polynomial, RationalTransferFunction};
use crate::error::invalid;
use crate::Result;

/// Coefficients (ascending in ζ) of the normalized 10–90 % rise time
/// `ω_n · t_r` of an underdamped second-order low-pass section.
pub const RISE_TIME_POLY: [f64; 4] = [1.0, 1.039, -0.417, 1.76];

/// Coefficients (ascending in ζ) of the normalized decay time `ω_n · t_d` of
/// a second-order high-pass section (first return of its step response to zero).
pub const DECAY_TIME_POLY: [f64; 4] = [1.56, -0.88, 0.42, -0.09];

/// Damping ratio, natural frequency and gain of a second-order section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderParams {
    pub zeta: f64,
    /// rad/s
    pub omega_n: f64,
    /// DC gain for a low-pass section, high-frequency gain for a high-pass one.
    pub gain: f64,
}

impl SecondOrderParams {
    pub fn new(zeta: f64, omega_n: f64, gain: f64) -> Result<Self> {
        check_zeta(zeta)?;
        check_omega(omega_n)?;
        if !gain.is_finite() {
            return Err(invalid("gain must be finite"));
        }
        Ok(Self { zeta, omega_n, gain })
    }

    fn denominator(&self) -> Polynomial {
        let w = self.omega_n;
        Polynomial::new(vec![w * w, 2.0 * self.zeta * w, 1.0])
    }

    /// `K ω_n² / (s² + 2ζω_n s + ω_n²)`
    pub fn low_pass(&self) -> RationalTransferFunction {
        let w2 = self.omega_n * self.omega_n;
        RationalTransferFunction::new(Polynomial::constant(self.gain * w2), self.denominator())
            .expect("denominator is monic")
    }

    /// `K s² / (s² + 2ζω_n s + ω_n²)`
    pub fn high_pass(&self) -> RationalTransferFunction {
        RationalTransferFunction::new(Polynomial::new(vec![0.0, 0.0, self.gain]), self.denominator())
            .expect("denominator is monic")
    }
}

pub(crate) fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("damping ratio must lie in (0, 1], got {zeta}")))
    }
}

fn check_omega(omega_n: f64) -> Result<()> {
    if omega_n > 0.0 && omega_n.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("natural frequency must be positive, got {omega_n}")))
    }
}

fn poly(c: &[f64; 4], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

/// `(1.76ζ³ − 0.417ζ² + 1.039ζ + 1) / ω_n`
pub fn rise_time_empirical(zeta: f64, omega_n: f64) -> Result<f64> {
    check_zeta(zeta)?;
    check_omega(omega_n)?;
    Ok(poly(&RISE_TIME_POLY, zeta) / omega_n)
}

/// `(−0.09ζ³ + 0.42ζ² − 0.88ζ + 1.56) / ω_n`
pub fn decay_time_empirical(zeta: f64, omega_n: f64) -> Result<f64> {
    check_zeta(zeta)?;
    check_omega(omega_n)?;
    Ok(poly(&DECAY_TIME_POLY, zeta) / omega_n)
}

/// Exact first zero of the high-pass unit-step response,
/// `acos(ζ) / (ω_n √(1 − ζ²))`, continuous at `ζ = 1` where it equals `1/ω_n`.
/// `ζ = 0` is accepted and gives the quarter period.
pub fn decay_time_analytic(zeta: f64, omega_n: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(invalid(format!("damping ratio must lie in [0, 1], got {zeta}")));
    }
    check_omega(omega_n)?;
    Ok(normalized_decay_analytic(zeta) / omega_n)
}

fn normalized_decay_analytic(zeta: f64) -> f64 {
    let theta = zeta.acos();
    if theta < 1e-4 {
        // θ / sin θ ≈ 1 + θ²/6 near critical damping
        1.0 + theta * theta / 6.0
    } else {
        theta / theta.sin()
    }
}

/// Natural frequency that gives rise time `rise_time` for damping `zeta`.
pub fn omega_from_rise_time(rise_time: f64, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    if !(rise_time > 0.0) {
        return Err(invalid("rise time must be positive"));
    }
    Ok(poly(&RISE_TIME_POLY, zeta) / rise_time)
}

/// How a high-pass natural frequency is solved from a decay time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// Exact zero-crossing relation; gives the ERCOT reactive-power boundary
    /// `s²/(s² + 20s + 100)` for a 100 ms decay.
    #[default]
    Analytic,
    /// The rounded cubic fit in [`DECAY_TIME_POLY`].
    Empirical,
}

/// Natural frequency whose high-pass step response first returns to zero
/// after `decay_time` seconds.
pub fn omega_from_decay_time(decay_time: f64, zeta: f64, model: DecayModel) -> Result<f64> {
    check_zeta(zeta)?;
    if !(decay_time > 0.0) {
        return Err(invalid("decay time must be positive"));
    }
    let normalized = match model {
        DecayModel::Analytic => normalized_decay_analytic(zeta),
        DecayModel::Empirical => poly(&DECAY_TIME_POLY, zeta),
    };
    Ok(normalized / decay_time)
}

/// `g(ζ) = √(1 − 2ζ² + √((1 − 2ζ²)² + 1))`, the −3 dB point of a unit
/// low-pass section in units of `ω_n`.
fn bandwidth_factor(zeta: f64) -> f64 {
    let a = 1.0 - 2.0 * zeta * zeta;
    (a + (a * a + 1.0).sqrt()).sqrt()
}

/// −3 dB frequency of the low-pass section, hertz.
pub fn bandwidth_lpf(zeta: f64, omega_n: f64) -> Result<f64> {
    check_zeta(zeta)?;
    check_omega(omega_n)?;
    Ok(omega_n * bandwidth_factor(zeta) / (2.0 * PI))
}

/// −3 dB frequency of the high-pass section, hertz.
pub fn bandwidth_hpf(zeta: f64, omega_n: f64) -> Result<f64> {
    check_zeta(zeta)?;
    check_omega(omega_n)?;
    Ok(omega_n / (bandwidth_factor(zeta) * 2.0 * PI))
}
