//! Frequency-domain Jacobian algebra.
//!
//! Admittance convention: `−[I_d; I_q] = Y(s)·[V_d; V_q]`. The 3/2 factor of
//! the amplitude-invariant dq power definition is applied by default and can
//! be switched off for scans that are already per-unitized.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::io::{fmt_e12, parse_field, write_atomic};
use crate::lti::{check_grid, RationalTransferFunction};
use crate::{Error, Result};

/// Nominal angular frequency of a 50 Hz system.
pub const OMEGA_50HZ: f64 = 2.0 * std::f64::consts::PI * 50.0;
/// Nominal angular frequency of a 60 Hz system.
pub const OMEGA_60HZ: f64 = 2.0 * std::f64::consts::PI * 60.0;

/// Whether the dq power expressions carry the 3/2 factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerScaling {
    #[default]
    ThreeHalves,
    Unity,
}

impl PowerScaling {
    pub fn factor(self) -> f64 {
        match self {
            PowerScaling::ThreeHalves => 1.5,
            PowerScaling::Unity => 1.0,
        }
    }
}

/// Pre-disturbance steady state at the point of interconnection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub p0: f64,
    pub q0: f64,
    pub v0: f64,
    pub omega_0: f64,
}

impl OperatingPoint {
    pub fn new(p0: f64, q0: f64, v0: f64, omega_0: f64) -> Result<Self> {
        let op = Self { p0, q0, v0, omega_0 };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(invalid("v0 must be positive"));
        }
        if !(self.omega_0 > 0.0 && self.omega_0.is_finite()) {
            return Err(invalid("omega_0 must be positive"));
        }
        if !(self.p0.is_finite() && self.q0.is_finite()) {
            return Err(invalid("p0 and q0 must be finite"));
        }
        Ok(())
    }
}

/// Instantaneous `(p, q)` from dq voltages and currents, with the 3/2 factor.
pub fn instantaneous_pq(v_d: f64, v_q: f64, i_d: f64, i_q: f64) -> (f64, f64) {
    (1.5 * (v_d * i_d + v_q * i_q), 1.5 * (-v_d * i_q + v_q * i_d))
}

/// Sampled dq admittance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmittanceScan {
    pub frequencies: Vec<f64>,
    pub y_dd: Vec<Complex64>,
    pub y_dq: Vec<Complex64>,
    pub y_qd: Vec<Complex64>,
    pub y_qq: Vec<Complex64>,
}

impl AdmittanceScan {
    pub fn new(
        frequencies: Vec<f64>,
        y_dd: Vec<Complex64>,
        y_dq: Vec<Complex64>,
        y_qd: Vec<Complex64>,
        y_qq: Vec<Complex64>,
    ) -> Result<Self> {
        check_grid(&frequencies)?;
        let n = frequencies.len();
        if [&y_dd, &y_dq, &y_qd, &y_qq].iter().any(|v| v.len() != n) {
            return Err(invalid("admittance arrays must match the frequency grid"));
        }
        Ok(Self { frequencies, y_dd, y_dq, y_qd, y_qq })
    }

    /// Samples a matrix-valued function of `s` on a grid.
    pub fn from_fn(frequencies: Vec<f64>, mut y: impl FnMut(Complex64) -> Result<Matrix2<Complex64>>) -> Result<Self> {
        check_grid(&frequencies)?;
        let n = frequencies.len();
        let (mut dd, mut dq, mut qd, mut qq) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &f in &frequencies {
            let m = y(Complex64::new(0.0, 2.0 * std::f64::consts::PI * f))?;
            dd.push(m[(0, 0)]);
            dq.push(m[(0, 1)]);
            qd.push(m[(1, 0)]);
            qq.push(m[(1, 1)]);
        }
        Self::new(frequencies, dd, dq, qd, qq)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,ydd_re,ydd_im,ydq_re,ydq_im,yqd_re,yqd_im,yqq_re,yqq_im\n");
        for k in 0..self.len() {
            out.push_str(&fmt_e12(self.frequencies[k]));
            for v in [self.y_dd[k], self.y_dq[k], self.y_qd[k], self.y_qq[k]] {
                let _ = write!(out, ",{},{}", fmt_e12(v.re), fmt_e12(v.im));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &'static str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column `{name}`") })
        };
        let idx = [
            col("f_hz")?,
            col("ydd_re")?,
            col("ydd_im")?,
            col("ydq_re")?,
            col("ydq_im")?,
            col("yqd_re")?,
            col("yqd_im")?,
            col("yqq_re")?,
            col("yqq_im")?,
        ];
        let mut f = Vec::new();
        let mut ys: [Vec<Complex64>; 4] = Default::default();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let get = |i: usize| parse_field(rec.get(idx[i]).unwrap_or(""), line, headers.get(idx[i]).unwrap_or(""));
            f.push(get(0)?);
            for (j, y) in ys.iter_mut().enumerate() {
                y.push(Complex64::new(get(1 + 2 * j)?, get(2 + 2 * j)?));
            }
        }
        check_monotone(&f)?;
        let [dd, dq, qd, qq] = ys;
        Self::new(f, dd, dq, qd, qq)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// Frequency-domain Jacobian entries sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianScan {
    pub frequencies: Vec<f64>,
    pub p_theta: Option<Vec<Complex64>>,
    pub q_v: Option<Vec<Complex64>>,
    pub p_v: Option<Vec<Complex64>>,
    pub q_theta: Option<Vec<Complex64>>,
}

/// The four Jacobian entries, as perturbation input to measured output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianEntry {
    ThetaToP,
    VToQ,
    VToP,
    ThetaToQ,
}

impl JacobianScan {
    pub fn new(
        frequencies: Vec<f64>,
        p_theta: Option<Vec<Complex64>>,
        q_v: Option<Vec<Complex64>>,
        p_v: Option<Vec<Complex64>>,
        q_theta: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        check_grid(&frequencies)?;
        if p_theta.is_none() && q_v.is_none() {
            return Err(invalid("a Jacobian scan needs p_theta or q_v"));
        }
        let n = frequencies.len();
        for v in [&p_theta, &q_v, &p_v, &q_theta].into_iter().flatten() {
            if v.len() != n {
                return Err(invalid("Jacobian arrays must match the frequency grid"));
            }
        }
        Ok(Self { frequencies, p_theta, q_v, p_v, q_theta })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn entry(&self, which: JacobianEntry) -> Option<&[Complex64]> {
        match which {
            JacobianEntry::ThetaToP => self.p_theta.as_deref(),
            JacobianEntry::VToQ => self.q_v.as_deref(),
            JacobianEntry::VToP => self.p_v.as_deref(),
            JacobianEntry::ThetaToQ => self.q_theta.as_deref(),
        }
    }

    /// True when only one of the two compliance channels is present.
    pub fn is_partial(&self) -> bool {
        self.p_theta.is_none() || self.q_v.is_none()
    }

    /// CSV `f_hz,ptheta_re,ptheta_im,qv_re,qv_im[,pv_re,pv_im,qtheta_re,qtheta_im]`.
    /// Absent channels are omitted from the header.
    pub fn to_csv(&self) -> String {
        let cols: Vec<(&str, &Vec<Complex64>)> =
            [("ptheta", &self.p_theta), ("qv", &self.q_v), ("pv", &self.p_v), ("qtheta", &self.q_theta)]
                .into_iter()
                .filter_map(|(n, v)| v.as_ref().map(|v| (n, v)))
                .collect();
        let mut out = String::from("f_hz");
        for (name, _) in &cols {
            let _ = write!(out, ",{name}_re,{name}_im");
        }
        out.push('\n');
        for k in 0..self.len() {
            out.push_str(&fmt_e12(self.frequencies[k]));
            for (_, v) in &cols {
                let _ = write!(out, ",{},{}", fmt_e12(v[k].re), fmt_e12(v[k].im));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let f_col = find("f_hz").ok_or_else(|| Error::Parse { line: 1, msg: "missing column `f_hz`".into() })?;
        let mut pairs: Vec<Option<(usize, usize)>> = Vec::new();
        for name in ["ptheta", "qv", "pv", "qtheta"] {
            let re = find(&format!("{name}_re"));
            let im = find(&format!("{name}_im"));
            pairs.push(match (re, im) {
                (Some(r), Some(i)) => Some((r, i)),
                (None, None) => None,
                _ => {
                    return Err(Error::Parse { line: 1, msg: format!("column pair {name}_re/{name}_im is incomplete") })
                }
            });
        }
        let mut f = Vec::new();
        let mut data: Vec<Option<Vec<Complex64>>> = pairs.iter().map(|p| p.map(|_| Vec::new())).collect();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let get = |i: usize| parse_field(rec.get(i).unwrap_or(""), line, headers.get(i).unwrap_or(""));
            f.push(get(f_col)?);
            for (p, d) in pairs.iter().zip(data.iter_mut()) {
                if let (Some((r, i)), Some(d)) = (p, d) {
                    d.push(Complex64::new(get(*r)?, get(*i)?));
                }
            }
        }
        check_monotone(&f)?;
        let mut it = data.into_iter();
        let (pt, qv, pv, qt) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        Self::new(f, pt, qv, pv, qt)
    }
}

fn check_monotone(f: &[f64]) -> Result<()> {
    if f.is_empty() {
        return Err(Error::Parse { line: 2, msg: "no data rows".into() });
    }
    for (k, w) in f.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::Parse {
                // header is line 1, first record line 2
                line: (k + 3) as u64,
                msg: format!("frequency column not strictly increasing ({} after {})", w[1], w[0]),
            });
        }
    }
    Ok(())
}

/// Reads a Jacobian scan CSV. Scans lacking the Q/V pair load with
/// `q_v = None`, which [`JacobianScan::is_partial`] reports.
pub fn load_scan(path: &Path) -> Result<JacobianScan> {
    JacobianScan::from_csv_reader(std::fs::File::open(path)?)
}

pub fn save_scan(scan: &JacobianScan, path: &Path) -> Result<()> {
    write_atomic(path, scan.to_csv().as_bytes())
}

/// Maps a sampled admittance to Jacobian entries around an operating point.
pub fn jacobian_from_admittance(
    scan: &AdmittanceScan,
    op: &OperatingPoint,
    scaling: PowerScaling,
) -> Result<JacobianScan> {
    op.validate()?;
    if scan.is_empty() {
        return Err(invalid("admittance scan is empty"));
    }
    let k = scaling.factor();
    let (p0, q0, v0) = (op.p0, op.q0, op.v0);
    let p_v = scan.y_dd.iter().map(|y| p0 / v0 - k * v0 * y).collect();
    let p_theta = scan.y_dq.iter().map(|y| -q0 - k * v0 * v0 * y).collect();
    let q_v = scan.y_qd.iter().map(|y| q0 / v0 + k * v0 * y).collect();
    let q_theta = scan.y_qq.iter().map(|y| p0 + k * v0 * v0 * y).collect();
    JacobianScan::new(scan.frequencies.clone(), Some(p_theta), Some(q_v), Some(p_v), Some(q_theta))
}

/// Ideal voltage source behind `r + s·l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealVsbiParams {
    pub r: f64,
    pub l: f64,
    pub op: OperatingPoint,
    #[serde(default)]
    pub scaling: PowerScaling,
}

impl IdealVsbiParams {
    pub fn validate(&self) -> Result<()> {
        self.op.validate()?;
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(invalid("r must be non-negative"));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(invalid("l must be positive"));
        }
        Ok(())
    }

    /// `(r + s·l)² + (ω₀·l)²`, ascending in `s`.
    pub fn denominator(&self) -> [f64; 3] {
        let (r, l, x) = (self.r, self.l, self.op.omega_0 * self.l);
        [r * r + x * x, 2.0 * r * l, l * l]
    }

    /// Closed-form `(p_theta, q_v)` transfer functions.
    pub fn transfer_functions(&self) -> Result<(RationalTransferFunction, RationalTransferFunction)> {
        self.validate()?;
        let den = self.denominator();
        let k = self.scaling.factor();
        let (q0, v0) = (self.op.q0, self.op.v0);
        let x = self.op.omega_0 * self.l;
        let numer = |offset: f64, coeff: f64| -> Vec<f64> {
            vec![offset * den[0] - coeff * x, offset * den[1], offset * den[2]]
        };
        let pt = RationalTransferFunction::from_coeffs(&numer(-q0, k * v0 * v0), &den)?;
        let qv = RationalTransferFunction::from_coeffs(&numer(q0 / v0, k * v0), &den)?;
        Ok((pt, qv))
    }
}

fn vsbi_den(r: f64, l: f64, omega_0: f64, s: Complex64) -> Result<Complex64> {
    let z = r + s * l;
    let den = z * z + (omega_0 * l) * (omega_0 * l);
    let scale = (r.abs() + s.norm() * l).powi(2) + (omega_0 * l).powi(2);
    if den.norm() <= 1e-14 * scale {
        return Err(Error::Singular(format!("admittance evaluated at a pole, s = {s}")));
    }
    Ok(den)
}

/// `Y(s)` of an ideal source behind `r + s·l`.
pub fn ideal_vsbi_admittance(r: f64, l: f64, omega_0: f64, s: Complex64) -> Result<Matrix2<Complex64>> {
    let den = vsbi_den(r, l, omega_0, s)?;
    let z = r + s * l;
    let x = Complex64::new(omega_0 * l, 0.0);
    Ok(Matrix2::new(z, x, -x, z) / den)
}

/// Poles of the ideal-VSBI admittance.
pub fn ideal_vsbi_poles(r: f64, l: f64, omega_0: f64) -> Vec<Complex64> {
    let x = omega_0 * l;
    crate::lti::Polynomial::new(vec![r * r + x * x, 2.0 * r * l, l * l]).roots()
}

/// `(p_theta, q_v)` of the ideal VSBI at `s`.
pub fn ideal_vsbi_jacobian(params: &IdealVsbiParams, s: Complex64) -> Result<(Complex64, Complex64)> {
    params.validate()?;
    let den = vsbi_den(params.r, params.l, params.op.omega_0, s)?;
    let k = params.scaling.factor();
    let (q0, v0) = (params.op.q0, params.op.v0);
    let term = params.op.omega_0 * params.l / den;
    Ok((-q0 - k * v0 * v0 * term, q0 / v0 - k * v0 * term))
}

/// Droop-controlled source behind a coupling reactance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroopParams {
    /// p.u. frequency per p.u. power
    pub droop_d: f64,
    /// power filter time constant, s
    pub t_f: f64,
    /// p.u.
    pub x_coup: f64,
}

impl DroopParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("droop_d", self.droop_d), ("t_f", self.t_f), ("x_coup", self.x_coup)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Closed-loop `P(s)/θ_POI(s)` of the droop loop:
/// `−(T_f s² + s) / (X T_f s² + X s + D)`.
pub fn droop_p_theta(params: &DroopParams) -> Result<RationalTransferFunction> {
    params.validate()?;
    let DroopParams { droop_d: d, t_f, x_coup: x } = *params;
    RationalTransferFunction::from_coeffs(&[0.0, -1.0, -t_f], &[d, x, x * t_f])
}
