//! Fixed-step time-domain simulation of small linear systems.

use super::{RationalTransferFunction, TimeSeries};
use crate::error::invalid;
use crate::{Error, Result};

/// Single-input single-output state-space model `x' = A x + B u`, `y = C x + D u`.
///
/// `a` is stored row-major. Systems here are tiny, so the integrator works on
/// flat vectors and preallocated stage buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

impl LinearSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n * n || c.len() != n {
            return Err(invalid("state-space dimensions are inconsistent"));
        }
        Ok(Self { n, a, b, c, d })
    }

    /// Controllable canonical realization. Biproper functions split off their
    /// feedthrough so the state part is strictly proper.
    pub fn from_transfer_function(tf: &RationalTransferFunction) -> Result<Self> {
        if !tf.is_proper() {
            return Err(Error::Improper { num: tf.numerator().degree(), den: tf.denominator().degree() });
        }
        let tf = tf.normalized();
        let den = tf.denominator().coefficients();
        let n = tf.denominator().degree();
        let d = if tf.numerator().degree() == n && !tf.numerator().is_zero() { tf.numerator().coeff(n) } else { 0.0 };
        // strictly proper remainder: num - d * den
        let c: Vec<f64> = (0..n).map(|k| tf.numerator().coeff(k) - d * den[k]).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n.saturating_sub(1) {
            a[i * n + i + 1] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[(n - 1) * n + j] = -den[j];
            }
        }
        let mut b = vec![0.0; n];
        if n > 0 {
            b[n - 1] = 1.0;
        }
        Self::new(a, b, c, d)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Eigenvalues of the state matrix.
    pub fn poles(&self) -> Vec<num_complex::Complex64> {
        if self.n == 0 {
            return Vec::new();
        }
        let a = nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.a);
        a.complex_eigenvalues().iter().copied().collect()
    }

    fn deriv(&self, x: &[f64], u: f64, out: &mut [f64]) {
        // a static gain has no states, and chunks_exact rejects a zero width
        if self.n == 0 {
            return;
        }
        for ((o, row), b) in out.iter_mut().zip(self.a.chunks_exact(self.n)).zip(&self.b) {
            *o = row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b * u;
        }
    }

    fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }

    /// Integrates from rest with classic fourth-order Runge–Kutta and returns
    /// `n_steps + 1` output samples at `t = k·dt`.
    pub fn simulate(&self, input: impl Fn(f64) -> f64, dt: f64, n_steps: usize) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(self.output(&x, input(0.0)));
        for k in 0..n_steps {
            let t = k as f64 * dt;
            let (u0, uh, u1) = (input(t), input(t + 0.5 * dt), input(t + dt));
            self.deriv(&x, u0, &mut k1);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * dt * k1[i];
            }
            self.deriv(&tmp, uh, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * dt * k2[i];
            }
            self.deriv(&tmp, uh, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + dt * k3[i];
            }
            self.deriv(&tmp, u1, &mut k4);
            for i in 0..n {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            out.push(self.output(&x, u1));
        }
        out
    }
}

/// Unit-step response on `[0, t_end]`; the step is applied at `t = 0`, so a
/// biproper system's first sample already carries its feedthrough.
pub fn step_response(tf: &RationalTransferFunction, t_end: f64, dt: f64) -> Result<TimeSeries> {
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(invalid("t_end and dt must be positive"));
    }
    if dt > t_end / 100.0 * (1.0 + 1e-12) {
        return Err(invalid(format!("dt = {dt} s is too coarse for t_end = {t_end} s (need dt <= t_end/100)")));
    }
    let sys = LinearSystem::from_transfer_function(tf)?;
    let n_steps = (t_end / dt).round() as usize;
    TimeSeries::new(dt, sys.simulate(|_| 1.0, dt, n_steps))
}

/// Integration step tied to the fastest pole: `1 / (200 · max |p|)`.
/// Pure gains get a fallback of 1 µs.
pub fn suggested_dt(tf: &RationalTransferFunction) -> f64 {
    let fastest = tf.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
    if fastest > 0.0 {
        1.0 / (200.0 * fastest)
    } else {
        1e-6
    }
}
