//! Synthetic three-device, twelve-state model with one weakly damped mode.
//!
//! The model is assembled as `A = V·M·V⁻¹`, with `M` block-diagonal in real
//! modal form, so its spectrum is known exactly. The weak pair sits in the
//! columns of `V` belonging to the second device, which therefore dominates
//! its participation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::StateSpaceModel;
use crate::Result;

/// Spectrum the fixture was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpectrum {
    /// every eigenvalue, conjugates included
    pub eigenvalues: Vec<Complex64>,
    pub weak_mode: Complex64,
    pub weak_damping_pct: f64,
    /// device that owns the weak mode
    pub weak_device: &'static str,
}

/// Weak pair: ζ = 6.77 % at 4.8 Hz.
const WEAK: (f64, f64) = (-2.046, 30.16);
/// (σ, ω) of the remaining complex pairs, in state order after the weak pair.
const PAIRS: [(f64, f64); 3] = [(-9.0, 55.0), (-12.0, 18.0), (-6.5, 11.0)];
const REALS: [f64; 4] = [-4.0, -15.0, -25.0, -40.0];

pub fn synthetic_fixture() -> Result<(StateSpaceModel, FixtureSpectrum)> {
    let n = 12;
    // state slots: device1 = 0..4, device2 = 4..8, device3 = 8..12
    let blocks: [(usize, (f64, f64)); 4] = [(4, WEAK), (0, PAIRS[0]), (8, PAIRS[1]), (6, PAIRS[2])];
    let real_slots = [2, 3, 10, 11];

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for &(k, (s, w)) in &blocks {
        m[(k, k)] = s;
        m[(k + 1, k + 1)] = s;
        m[(k, k + 1)] = w;
        m[(k + 1, k)] = -w;
        eigenvalues.push(Complex64::new(s, w));
        eigenvalues.push(Complex64::new(s, -w));
    }
    for (&k, &l) in real_slots.iter().zip(REALS.iter()) {
        m[(k, k)] = l;
        eigenvalues.push(Complex64::new(l, 0.0));
    }

    // well-conditioned mixing with a fixed, reproducible pattern
    let v = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            0.15 * ((1.0 + i as f64) * 0.7 + (1.0 + j as f64) * 1.3).sin() / (1.0 + (i as f64 - j as f64).abs())
        }
    });
    let v_inv = v.clone().try_inverse().expect("mixing matrix is diagonally dominant");
    let a = &v * m * v_inv;

    // bus k observes two states of device k plus a little of its neighbour
    let mut c = DMatrix::<f64>::zeros(6, n);
    for bus in 0..3 {
        let base = 4 * bus;
        c[(2 * bus, base)] = 1.0;
        c[(2 * bus + 1, base + 1)] = 1.0;
        let next = (base + 4) % n;
        c[(2 * bus, next)] = 0.1;
        c[(2 * bus + 1, next + 1)] = 0.1;
    }

    let groups: BTreeMap<String, Vec<usize>> =
        (0..3).map(|d| (format!("ibr{}", d + 1), (4 * d..4 * d + 4).collect())).collect();
    let pairs: BTreeMap<String, (usize, usize)> =
        (0..3).map(|b| (format!("bus{}", b + 1), (2 * b, 2 * b + 1))).collect();
    let model = StateSpaceModel::new(a, c, groups, pairs)?;
    let weak = Complex64::new(WEAK.0, WEAK.1);
    Ok((
        model,
        FixtureSpectrum {
            eigenvalues,
            weak_mode: weak,
            weak_damping_pct: 100.0 * -WEAK.0 / weak.norm(),
            weak_device: "ibr2",
        },
    ))
}
