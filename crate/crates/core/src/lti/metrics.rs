//! Step-response metrics and the moving-average measurement filter.
//!
//! Every metric takes an explicit `baseline`: the pre-disturbance value of
//! the signal. For unit-step responses simulated from rest this is zero.

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::invalid;
use crate::{Error, Result};

/// Fraction of the series (by sample count) that must lie inside the
/// settling band for the final value to be trusted.
const SETTLE_TAIL_FRACTION: f64 = 0.05;
/// Half-width of the settling band relative to the total change.
const SETTLE_BAND: f64 = 0.01;

/// Final value of a series that has settled, or `MetricUndefined`.
pub fn settled_final_value(series: &TimeSeries, baseline: f64) -> Result<f64> {
    let yf = series.last();
    let change = (yf - baseline).abs();
    if change == 0.0 || !change.is_finite() {
        return Err(Error::MetricUndefined(
            "series ends at its baseline; no net change to measure a rise against".into(),
        ));
    }
    let n = series.len();
    let tail = ((n as f64 * SETTLE_TAIL_FRACTION).ceil() as usize).clamp(1, n);
    let band = SETTLE_BAND * change;
    if series.samples[n - tail..].iter().any(|y| (y - yf).abs() > band) {
        return Err(Error::MetricUndefined("series has not settled: last 5% of samples leave the 1% band".into()));
    }
    Ok(yf)
}

/// First time the series reaches `baseline + frac·(reference − baseline)`,
/// interpolated linearly between the bracketing samples.
pub fn time_to_fraction(series: &TimeSeries, baseline: f64, reference: f64, frac: f64) -> Option<f64> {
    let span = reference - baseline;
    let dir = span.signum();
    let target = frac * span.abs();
    let progress = |y: f64| (y - baseline) * dir;
    let k = series.samples.iter().position(|&y| progress(y) >= target)?;
    if k == 0 {
        return Some(series.time(0));
    }
    let (p0, p1) = (progress(series.samples[k - 1]), progress(series.samples[k]));
    let frac_step = if p1 > p0 { (target - p0) / (p1 - p0) } else { 1.0 };
    Some(series.time(k - 1) + frac_step * series.dt)
}

/// 10 % → 90 % rise time measured against an explicit reference level.
pub fn rise_time_between(series: &TimeSeries, baseline: f64, reference: f64) -> Result<f64> {
    if reference == baseline {
        return Err(Error::MetricUndefined("reference level equals baseline".into()));
    }
    let t10 = time_to_fraction(series, baseline, reference, 0.1);
    let t90 = time_to_fraction(series, baseline, reference, 0.9);
    match (t10, t90) {
        (Some(a), Some(b)) => Ok(b - a),
        _ => Err(Error::MetricUndefined("series never reaches 90% of its reference".into())),
    }
}

/// 10 % → 90 % rise time relative to the settled final value.
pub fn rise_time_10_90(series: &TimeSeries, baseline: f64) -> Result<f64> {
    let yf = settled_final_value(series, baseline)?;
    rise_time_between(series, baseline, yf)
}

/// Time from the start of the series to 90 % of the settled final value.
/// This is the reading used by operator texts ("reach 90% of the change").
pub fn rise_time_0_90(series: &TimeSeries, baseline: f64) -> Result<f64> {
    let yf = settled_final_value(series, baseline)?;
    time_to_fraction(series, baseline, yf, 0.9)
        .map(|t| t - series.t0)
        .ok_or_else(|| Error::MetricUndefined("series never reaches 90% of its final value".into()))
}

/// Largest absolute deviation from `baseline`, signed by the direction of
/// the first significant (≥ 1 % of the largest) deviation.
pub fn peak_value(series: &TimeSeries, baseline: f64) -> f64 {
    let max = series.samples.iter().map(|y| (y - baseline).abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let first = series.samples.iter().map(|y| y - baseline).find(|d| d.abs() >= 0.01 * max).unwrap_or(0.0);
    max.copysign(first)
}

/// First time the series returns to `baseline` after starting away from it,
/// or `None` if it never does within the record.
pub fn decay_time_zero_crossing(series: &TimeSeries, baseline: f64) -> Option<f64> {
    let dev: Vec<f64> = series.samples.iter().map(|y| y - baseline).collect();
    let max = dev.iter().map(|d| d.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let start = dev.iter().position(|d| d.abs() > 1e-9 * max)?;
    let sign = dev[start].signum();
    let k = (start + 1..dev.len()).find(|&k| dev[k] * sign <= 0.0)?;
    if dev[k] == 0.0 {
        return Some(series.time(k));
    }
    let (d0, d1) = (dev[k - 1], dev[k]);
    Some(series.time(k - 1) + d0 / (d0 - d1) * series.dt)
}

/// Number of sign changes of `series − baseline`, ignoring exact zeros.
pub fn sign_changes(series: &TimeSeries, baseline: f64) -> usize {
    let mut last = 0.0;
    let mut count = 0;
    for y in &series.samples {
        let s = (y - baseline).signum();
        if y - baseline == 0.0 {
            continue;
        }
        if last != 0.0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Causal boxcar average over the trailing `window` seconds. Samples before
/// the record are taken equal to the first sample (steady pre-history).
pub fn moving_average(series: &TimeSeries, window: f64) -> Result<TimeSeries> {
    if !(window >= series.dt * (1.0 - 1e-9)) {
        return Err(invalid(format!("window {window} s is shorter than the sample interval {} s", series.dt)));
    }
    let w = ((window / series.dt).round() as usize).max(1);
    let x = &series.samples;
    let x0 = x[0];
    let at = |i: isize| if i < 0 { x0 } else { x[i as usize] };
    let mut sum = x0 * w as f64;
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() as isize {
        sum += at(k) - at(k - w as isize);
        out.push(sum / w as f64);
    }
    TimeSeries::with_start(series.dt, series.t0, out)
}

/// Metrics of one moving-average window applied to a response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedMetrics {
    pub window_s: f64,
    pub rise_time_10_90_s: f64,
    pub peak: f64,
}

/// Re-measures a response through each averaging window, showing how the
/// measurement filter alone shifts the reported rise time and peak.
pub fn measurement_window_sensitivity(
    series: &TimeSeries,
    baseline: f64,
    windows: &[f64],
) -> Result<Vec<WindowedMetrics>> {
    windows
        .iter()
        .map(|&w| {
            let filtered = moving_average(series, w)?;
            Ok(WindowedMetrics {
                window_s: w,
                rise_time_10_90_s: rise_time_10_90(&filtered, baseline)?,
                peak: peak_value(&filtered, baseline),
            })
        })
        .collect()
}
