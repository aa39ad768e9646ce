//! Linear time-invariant building blocks.

mod fit;
mod metrics;
mod polynomial;
mod second_order;
mod series;
mod simulate;
mod transfer_function;

pub use fit::{fit_cubic, fit_polynomial, PolynomialFit};
pub use metrics::{
    decay_time_zero_crossing, measurement_window_sensitivity, moving_average, peak_value, rise_time_0_90,
    rise_time_10_90, rise_time_between, settled_final_value, sign_changes, time_to_fraction, WindowedMetrics,
};
pub use polynomial::Polynomial;
pub use second_order::{
    bandwidth_hpf, bandwidth_lpf, decay_time_analytic, decay_time_empirical, omega_from_decay_time,
    omega_from_rise_time, rise_time_empirical, DecayModel, SecondOrderParams, DECAY_TIME_POLY, RISE_TIME_POLY,
};
pub(crate) use series::check_grid;
pub use series::{FrequencyResponse, TimeSeries};
pub use simulate::{step_response, suggested_dt, LinearSystem};
pub use transfer_function::{freq_response, RationalTransferFunction};

/// Settle time used when simulating a step response to measure it: long
/// enough for every pole to decay by many time constants.
pub fn measurement_horizon(tf: &RationalTransferFunction) -> f64 {
    let slowest = tf.poles().iter().map(|p| -p.re).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if slowest.is_finite() {
        40.0 / slowest
    } else {
        1.0
    }
}
