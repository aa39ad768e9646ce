//! Least-squares polynomial fitting with goodness-of-fit statistics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFit {
    /// Ascending powers of `x`.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    /// `√(SSE / (n − p))` with `p` fitted coefficients.
    pub rmse: f64,
    pub residuals: Vec<f64>,
}

impl PolynomialFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Least-squares cubic; needs at least five points and four distinct abscissae.
pub fn fit_cubic(x: &[f64], y: &[f64]) -> Result<PolynomialFit> {
    if x.len() < 5 {
        return Err(invalid("cubic fit needs at least five points"));
    }
    fit_polynomial(x, y, 3)
}

/// Least-squares polynomial of the given degree. The normal equations are
/// formed on a centered, scaled abscissa and the result is mapped back.
pub fn fit_polynomial(x: &[f64], y: &[f64], degree: usize) -> Result<PolynomialFit> {
    let n = x.len();
    let p = degree + 1;
    if n != y.len() {
        return Err(invalid("x and y lengths differ"));
    }
    if n < p {
        return Err(Error::Singular(format!("{n} points cannot determine {p} coefficients")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("fit data must be finite"));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let scale = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular("all abscissae coincide".into()));
    }
    let u: Vec<f64> = x.iter().map(|v| (v - mean) / scale).collect();

    let design = DMatrix::from_fn(n, p, |i, j| u[i].powi(j as i32));
    let normal = design.transpose() * &design;
    let rhs = design.transpose() * DVector::from_column_slice(y);
    let lu = normal.clone().lu();
    let diag_max = (0..p).map(|i| normal[(i, i)].abs()).fold(0.0, f64::max);
    let u_factor = lu.u();
    let pivot_min = (0..p).map(|i| u_factor[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if pivot_min <= 1e-12 * diag_max {
        return Err(Error::Singular("design matrix is rank deficient".into()));
    }
    let b = lu.solve(&rhs).ok_or_else(|| Error::Singular("normal equations are singular".into()))?;

    // p(x) = Σ b_k ((x − m)/s)^k, expanded with the binomial theorem.
    let mut coefficients = vec![0.0; p];
    for (k, bk) in b.iter().enumerate() {
        let sk = scale.powi(k as i32);
        for (j, c) in coefficients.iter_mut().enumerate().take(k + 1) {
            *c += bk * binomial(k, j) * (-mean).powi((k - j) as i32) / sk;
        }
    }

    let fitted: Vec<f64> = u.iter().map(|ui| b.iter().rev().fold(0.0, |acc, c| acc * ui + c)).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    let dof = n.saturating_sub(p);
    let adjusted_r_squared = if dof > 0 { 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / dof as f64 } else { f64::NAN };
    let rmse = if dof > 0 { (sse / dof as f64).sqrt() } else { 0.0 };
    Ok(PolynomialFit { coefficients, r_squared, adjusted_r_squared, rmse, residuals })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
