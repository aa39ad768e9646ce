//! Small-signal modal analysis of a linear state-space model.
//!
//! Right eigenvectors come from a complex Schur decomposition followed by
//! triangular back-substitution. Left eigenvectors are the rows of the
//! inverse of the right-eigenvector matrix, so `φᵢᵀψⱼ = δᵢⱼ` holds by
//! construction; a badly conditioned eigenvector matrix (a nearly defective
//! `A`) is reported rather than hidden.

mod bundle;
mod fixture;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

pub use bundle::{load_bundle, parse_bundle, write_bundle};
pub use fixture::{synthetic_fixture, FixtureSpectrum};

use crate::error::invalid;
use crate::{Error, Result};

/// Eigenvector-matrix condition number above which participation is unreliable.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative imaginary part below which an eigenvalue counts as real.
const REAL_TOL: f64 = 1e-9;

/// `x' = A x`, `y = C x`, with states grouped by device and outputs paired by bus.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    state_groups: BTreeMap<String, Vec<usize>>,
    output_pairs: BTreeMap<String, (usize, usize)>,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        c: DMatrix<f64>,
        state_groups: BTreeMap<String, Vec<usize>>,
        output_pairs: BTreeMap<String, (usize, usize)>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(invalid(format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
        }
        if c.ncols() != n {
            return Err(invalid(format!("C has {} columns but A has {n} states", c.ncols())));
        }
        if a.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("A and C must have finite entries"));
        }
        let mut owner: Vec<Option<&str>> = vec![None; n];
        for (name, idx) in &state_groups {
            for &k in idx {
                if k >= n {
                    return Err(invalid(format!("state group `{name}` refers to state {k}, but N = {n}")));
                }
                if let Some(other) = owner[k] {
                    return Err(invalid(format!("state {k} belongs to both `{other}` and `{name}`")));
                }
                owner[k] = Some(name);
            }
        }
        let m = c.nrows();
        for (bus, &(d, q)) in &output_pairs {
            if d >= m || q >= m {
                return Err(invalid(format!("bus `{bus}` pairs outputs ({d}, {q}), but M = {m}")));
            }
        }
        Ok(Self { a, c, state_groups, output_pairs })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn state_groups(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.state_groups
    }

    pub fn output_pairs(&self) -> &BTreeMap<String, (usize, usize)> {
        &self.output_pairs
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }
}

/// One eigenvalue with its right and left eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub lambda: Complex64,
    /// `|Im λ| / 2π`
    pub frequency_hz: f64,
    /// `None` for `λ = 0`
    pub damping_pct: Option<f64>,
    /// unit 2-norm
    pub right: Vec<Complex64>,
    /// scaled so that `φᵀψ = 1`
    pub left: Vec<Complex64>,
    /// 2 when this entry stands for a complex-conjugate pair
    pub multiplicity: usize,
    /// false when the eigenvector matrix is too ill-conditioned to trust
    pub reliable: bool,
}

/// All eigenpairs of a model together with conditioning information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalAnalysis {
    /// one entry per real eigenvalue or conjugate pair, least damped first
    pub modes: Vec<Mode>,
    /// every eigenvalue, in Schur order
    pub eigenvalues: Vec<Complex64>,
    pub condition_number: f64,
    pub warnings: Vec<String>,
}

/// Damping ratio in percent: `100·(−Re λ)/|λ|`.
pub fn damping_ratio(lambda: Complex64) -> Result<f64> {
    let mag = lambda.norm();
    if mag == 0.0 {
        return Err(Error::MetricUndefined("damping ratio of a zero eigenvalue".into()));
    }
    // hypot can land one ulp under |Re λ|; keep the ratio inside its range
    Ok((100.0 * (-lambda.re) / mag).clamp(-100.0, 100.0))
}

/// Full eigen-decomposition: `(λ, Ψ, Φ)` with columns of `Ψ` the right
/// eigenvectors and rows of `Φ = Ψ⁻¹` the left ones.
pub fn eigen_decomposition(a: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));
    let schur = nalgebra::linalg::Schur::try_new(ac, f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let lambdas: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let t_norm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * t_norm;

    let mut psi = DMatrix::<Complex64>::zeros(n, n);
    let mut x = DVector::<Complex64>::zeros(n);
    for k in 0..n {
        x.fill(Complex64::new(0.0, 0.0));
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut den = t[(i, i)] - t[(k, k)];
            if den.norm() < small {
                den = Complex64::new(small, 0.0);
            }
            x[i] = -acc / den;
        }
        let v = &q * &x;
        let norm = v.norm();
        psi.set_column(k, &(v / Complex64::new(norm, 0.0)));
    }
    let phi = psi
        .clone()
        .try_inverse()
        .or_else(|| psi.clone().pseudo_inverse(f64::EPSILON).ok())
        .ok_or_else(|| Error::Singular("eigenvector matrix is not invertible".into()))?;
    Ok((lambdas, psi, phi))
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues, damping and eigenvectors of `A`, one entry per real mode or
/// conjugate pair (the member with positive imaginary part), sorted by
/// damping ascending, then frequency, then decay rate.
pub fn compute_modes(model: &StateSpaceModel) -> Result<ModalAnalysis> {
    let (lambdas, psi, phi) = eigen_decomposition(&model.a)?;
    let cond = condition_number(&psi);
    let reliable = cond <= CONDITION_LIMIT;
    let mut warnings = Vec::new();
    if !reliable {
        warnings.push(format!(
            "eigenvector matrix condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; A is close to defective and participation factors are unreliable"
        ));
    }
    let mut modes = Vec::new();
    for (k, &l) in lambdas.iter().enumerate() {
        let is_real = l.im.abs() <= REAL_TOL * l.norm().max(1.0);
        if !is_real && l.im < 0.0 {
            continue;
        }
        modes.push(Mode {
            lambda: if is_real { Complex64::new(l.re, 0.0) } else { l },
            frequency_hz: if is_real { 0.0 } else { l.im.abs() / (2.0 * std::f64::consts::PI) },
            damping_pct: damping_ratio(l).ok(),
            right: psi.column(k).iter().copied().collect(),
            left: phi.row(k).iter().copied().collect(),
            multiplicity: if is_real { 1 } else { 2 },
            reliable,
        });
    }
    modes.sort_by(|a, b| {
        let da = a.damping_pct.unwrap_or(f64::NEG_INFINITY);
        let db = b.damping_pct.unwrap_or(f64::NEG_INFINITY);
        // ties (typically real modes at 100 %) put the slowest decay first
        da.total_cmp(&db).then(a.frequency_hz.total_cmp(&b.frequency_hz)).then(b.lambda.re.total_cmp(&a.lambda.re))
    });
    Ok(ModalAnalysis { modes, eigenvalues: lambdas, condition_number: cond, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipationReport {
    pub lambda: Complex64,
    /// `Σ_k |φ[k]·ψ[k]|` over each device's states
    pub raw: BTreeMap<String, f64>,
    /// `raw / max(raw)`
    pub normalized: BTreeMap<String, f64>,
    pub empty_groups: Vec<String>,
    pub reliable: bool,
}

/// Per-device participation in a mode.
pub fn participation_factors(model: &StateSpaceModel, mode: &Mode) -> Result<ParticipationReport> {
    let n = model.n_states();
    if mode.left.len() != n || mode.right.len() != n {
        return Err(invalid("mode does not belong to this model"));
    }
    let mut raw = BTreeMap::new();
    let mut empty_groups = Vec::new();
    for (name, idx) in &model.state_groups {
        if idx.is_empty() {
            empty_groups.push(name.clone());
        }
        let p: f64 = idx.iter().map(|&k| (mode.left[k] * mode.right[k]).norm()).sum();
        raw.insert(name.clone(), p);
    }
    let max = raw.values().cloned().fold(0.0, f64::max);
    let normalized = raw.iter().map(|(k, v)| (k.clone(), if max > 0.0 { v / max } else { 0.0 })).collect();
    Ok(ParticipationReport { lambda: mode.lambda, raw, normalized, empty_groups, reliable: mode.reliable })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub lambda: Complex64,
    /// `√(|(Cψ)_vD|² + |(Cψ)_vQ|²)` per bus, with `ψ` of unit norm
    pub per_bus: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Voltage-magnitude observability of a mode at every paired bus.
pub fn modal_observability(model: &StateSpaceModel, mode: &Mode) -> Result<ObservabilityReport> {
    if mode.right.len() != model.n_states() {
        return Err(invalid("mode does not belong to this model"));
    }
    let psi = DVector::from_vec(mode.right.clone());
    let cc: DMatrix<Complex64> = model.c.map(|v| Complex64::new(v, 0.0));
    let obs = cc * psi;
    let mut warnings = Vec::new();
    if model.output_pairs.is_empty() {
        warnings.push("no bus output pairs defined; observability skipped".to_string());
    }
    let per_bus = model
        .output_pairs
        .iter()
        .map(|(bus, &(d, q))| (bus.clone(), (obs[d].norm_sqr() + obs[q].norm_sqr()).sqrt()))
        .collect();
    Ok(ObservabilityReport { lambda: mode.lambda, per_bus, warnings })
}
