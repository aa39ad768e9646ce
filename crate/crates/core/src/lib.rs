//! Frequency-domain compliance assessment for grid-forming inverters.
//!
//! The crate turns time-domain "voltage source behind impedance" criteria
//! (rise time, peak value, decay time) into minimum Bode-magnitude envelopes
//! for the `P(s)/θ(s)` and `Q(s)/V(s)` entries of a device's frequency-domain
//! Jacobian, extracts those entries from models or perturbation scans, and
//! renders pass/fail verdicts. A small modal-analysis toolkit (eigenvalues,
//! participation factors, voltage observability) is included for
//! system-level studies.
//!
//! Module map:
//!
//! - [`lti`]: polynomials, rational transfer functions, step/frequency
//!   response, response metrics and the empirical second-order formulas.
//! - [`envelope`]: boundary filters, compliance envelopes, operator presets.
//! - [`jacobian`]: admittance/Jacobian algebra, ideal VSBI and droop models.
//! - [`scan`]: sinusoidal-perturbation Jacobian scans of black-box devices.
//! - [`compliance`]: verdicts, time/frequency cross-checks and report output.
//! - [`modal`]: eigen-decomposition, participation and observability.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compliance;
pub mod envelope;
mod error;
pub mod io;
pub mod jacobian;
pub mod lti;
pub mod modal;
pub mod scan;

pub use error::{Error, Result};

pub use compliance::{check_compliance, time_domain_crosscheck, ComplianceReport, EquivalenceReport, Verdict};
pub use envelope::{
    build_envelope, BoundaryFilter, Channel, ComplianceEnvelope, EnvelopeOptions, Preset, TimeDomainCriteria,
};
pub use jacobian::{JacobianScan, OperatingPoint};
pub use lti::{FrequencyResponse, Polynomial, RationalTransferFunction, TimeSeries};
pub use modal::{compute_modes, Mode, StateSpaceModel};
pub use scan::{BlackBoxDevice, ScanConfig};
