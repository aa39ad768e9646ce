use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::io::{fmt_e12, parse_field, write_atomic};
use crate::Result;

/// Complex frequency response on a strictly increasing, positive hertz grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    frequencies: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(frequencies: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        check_grid(&frequencies)?;
        if frequencies.len() != values.len() {
            return Err(invalid(format!("{} frequencies but {} values", frequencies.len(), values.len())));
        }
        Ok(Self { frequencies, values })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// CSV with header `f_hz,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,re,im\n");
        for (f, v) in self.frequencies.iter().zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", fmt_e12(*f), fmt_e12(v.re), fmt_e12(v.im)));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub t0: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_start(dt, 0.0, samples)
    }

    pub fn with_start(dt: f64, t0: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("sample interval must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(invalid("a time series needs at least two samples"));
        }
        Ok(Self { dt, t0, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.time(k))
    }

    /// Linear interpolation at time `t`, clamped to the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        if x <= 0.0 {
            return self.samples[0];
        }
        let k = x.floor() as usize;
        if k + 1 >= self.samples.len() {
            return *self.samples.last().unwrap();
        }
        let frac = x - k as f64;
        self.samples[k] + frac * (self.samples[k + 1] - self.samples[k])
    }

    pub fn last(&self) -> f64 {
        *self.samples.last().unwrap()
    }

    /// CSV with header `t_s,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,value\n");
        for (t, v) in self.times().zip(&self.samples) {
            out.push_str(&format!("{},{}\n", fmt_e12(t), fmt_e12(*v)));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    /// Reads the `t_s,value` format; the sample interval is taken from the
    /// first two rows and every later row must stay on that grid.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t_s" || &headers[1] != "value" {
            return Err(crate::Error::Parse { line: 1, msg: "expected header `t_s,value`".into() });
        }
        let mut t = Vec::new();
        let mut v = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            t.push(parse_field(&rec[0], line, "t_s")?);
            v.push(parse_field(&rec[1], line, "value")?);
        }
        if t.len() < 2 {
            return Err(invalid("a time series needs at least two samples"));
        }
        let dt = t[1] - t[0];
        for (k, tk) in t.iter().enumerate() {
            let expected = t[0] + k as f64 * dt;
            if (tk - expected).abs() > 1e-6 * dt.abs().max(1e-300) + 1e-9 * expected.abs() {
                return Err(crate::Error::Parse { line: k as u64 + 2, msg: "samples are not uniformly spaced".into() });
            }
        }
        Self::with_start(dt, t[0], v)
    }
}

pub(crate) fn check_grid(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(invalid("frequency grid is empty"));
    }
    if freqs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(invalid("frequencies must be positive and finite"));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("frequencies must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_or_bad_series() {
        assert!(TimeSeries::new(0.1, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(-1.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ts = TimeSeries::new(1e-3, vec![0.0, 0.25, 1.0 / 3.0, -2.5]).unwrap();
        let text = ts.to_csv();
        assert!(text.starts_with("t_s,value\n0.000000000000e+00,0.000000000000e+00\n"));
        let back = TimeSeries::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn interpolates_between_samples() {
        let ts = TimeSeries::new(1.0, vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(ts.value_at(0.5), 1.0);
        assert_eq!(ts.value_at(10.0), 4.0);
        assert_eq!(ts.value_at(-1.0), 0.0);
    }
}
