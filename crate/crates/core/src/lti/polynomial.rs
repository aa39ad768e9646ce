use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real polynomial in the Laplace variable, coefficients in ascending powers.
///
/// Trailing (highest-order) zeros are trimmed on construction, so the last
/// stored coefficient is nonzero unless the polynomial is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0.0 {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(0.0);
        }
        Self { coefficients }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Coefficients in ascending powers of `s`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coefficients.last().unwrap()
    }

    /// Coefficient of `s^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coefficients.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coefficients.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coefficients.len().max(other.coefficients.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    /// All complex roots. Degrees one and two use closed forms, higher
    /// degrees the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let c: Vec<f64> = self.coefficients.iter().map(|x| x / lead).collect();
        match n {
            1 => vec![Complex64::new(-c[0], 0.0)],
            2 => {
                let (b, c0) = (c[1], c[0]);
                let disc = b * b - 4.0 * c0;
                if disc >= 0.0 {
                    // Stable form avoids cancellation for the smaller root.
                    let q = -0.5 * (b + b.signum() * disc.sqrt());
                    let r1 = if q != 0.0 { q } else { 0.0 };
                    let r2 = if q != 0.0 { c0 / q } else { -b };
                    vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
                } else {
                    let re = -0.5 * b;
                    let im = 0.5 * (-disc).sqrt();
                    vec![Complex64::new(re, im), Complex64::new(re, -im)]
                }
            }
            _ => {
                let mut m = DMatrix::<f64>::zeros(n, n);
                for i in 1..n {
                    m[(i, i - 1)] = 1.0;
                }
                for i in 0..n {
                    m[(i, n - 1)] = -c[i];
                }
                m.complex_eigenvalues().iter().copied().collect()
            }
        }
    }
}

impl From<Vec<f64>> for Polynomial {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coefficients
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coefficients.iter().enumerate().rev() {
            if c == 0.0 && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a:.6e}")?,
                1 => write!(f, "{a:.6e} s")?,
                _ => write!(f, "{a:.6e} s^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}
