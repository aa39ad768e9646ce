use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

/// Inputs of the effective-reactance calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntsoeParams {
    /// POI voltage, p.u.
    pub u_inv: f64,
    /// effective reactance between internal source and POI at nominal frequency, p.u.
    pub x_eff: f64,
    /// angle between internal source and POI, rad
    pub delta: f64,
    /// droop constant, p.u./p.u.
    pub k_f: f64,
    /// rad/s
    pub omega_0: f64,
}

impl EntsoeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_eff > 0.0) {
            return Err(invalid("x_eff must be positive"));
        }
        if !(self.k_f > 0.0) {
            return Err(invalid("k_f must be positive"));
        }
        if !(self.omega_0 > 0.0) {
            return Err(invalid("omega_0 must be positive"));
        }
        Ok(())
    }
}

/// Expected active current `−(u_inv / x_eff) · sin δ`.
pub fn entsoe_peak_current(p: &EntsoeParams) -> Result<f64> {
    if !(p.x_eff > 0.0) {
        return Err(invalid("x_eff must be positive"));
    }
    Ok(-(p.u_inv / p.x_eff) * p.delta.sin())
}

/// Expected decay time constant `x_eff / (k_f ω_0)`, seconds.
pub fn entsoe_decay_tau(p: &EntsoeParams) -> Result<f64> {
    p.validate()?;
    Ok(p.x_eff / (p.k_f * p.omega_0))
}
