use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FrequencyResponse, Polynomial};
use crate::error::invalid;
use crate::{Error, Result};

/// Ratio of two real polynomials in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTransferFunction {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl RationalTransferFunction {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(invalid("transfer function denominator is the zero polynomial"));
        }
        if numerator.coefficients().iter().chain(denominator.coefficients()).any(|c| !c.is_finite()) {
            return Err(invalid("transfer function coefficients must be finite"));
        }
        Ok(Self { numerator, denominator })
    }

    /// Builds from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn gain(k: f64) -> Self {
        Self { numerator: Polynomial::constant(k), denominator: Polynomial::constant(1.0) }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn is_proper(&self) -> bool {
        self.numerator.degree() <= self.denominator.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.numerator.is_zero() || self.numerator.degree() < self.denominator.degree()
    }

    /// Rescales so the denominator is monic. The represented function is unchanged.
    pub fn normalized(&self) -> Self {
        let lead = self.denominator.leading();
        Self { numerator: self.numerator.scale(1.0 / lead), denominator: self.denominator.scale(1.0 / lead) }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.numerator.eval(s) / self.denominator.eval(s)
    }

    /// `H(j 2π f)`, failing when the denominator vanishes there.
    pub fn eval_hz(&self, f: f64) -> Result<Complex64> {
        let s = Complex64::new(0.0, 2.0 * PI * f);
        let den = self.denominator.eval(s);
        let scale = self
            .denominator
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * s.norm().powi(k as i32))
            .fold(0.0, f64::max);
        if den.norm() <= f64::EPSILON * scale || den.norm() == 0.0 {
            return Err(Error::Evaluation { freq_hz: f });
        }
        Ok(self.numerator.eval(s) / den)
    }

    pub fn magnitude_hz(&self, f: f64) -> Result<f64> {
        self.eval_hz(f).map(|h| h.norm())
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.denominator.roots()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        self.numerator.roots()
    }

    /// True when every pole lies in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    /// Fails with the pole listing when any pole is on or right of the imaginary axis.
    pub fn ensure_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::Unstable { poles: self.poles() })
        }
    }

    /// Limit of `H(s)` as `s → ∞` for a proper function (zero when strictly proper).
    pub fn high_frequency_gain(&self) -> f64 {
        if self.numerator.degree() == self.denominator.degree() && !self.numerator.is_zero() {
            self.numerator.leading() / self.denominator.leading()
        } else {
            0.0
        }
    }

    pub fn dc_gain(&self) -> Option<f64> {
        let d0 = self.denominator.coeff(0);
        (d0 != 0.0).then(|| self.numerator.coeff(0) / d0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { numerator: self.numerator.mul(&other.numerator), denominator: self.denominator.mul(&other.denominator) }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { numerator: self.numerator.scale(k), denominator: self.denominator.clone() }
    }
}

impl fmt::Display for RationalTransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

/// Evaluates `tf` at `j 2π f` for every frequency of a strictly increasing, positive grid.
pub fn freq_response(tf: &RationalTransferFunction, freqs: &[f64]) -> Result<FrequencyResponse> {
    let values = freqs.iter().map(|&f| tf.eval_hz(f)).collect::<Result<Vec<_>>>()?;
    FrequencyResponse::new(freqs.to_vec(), values)
}
