//! Report serialization: plain text, structured JSON, per-point CSV and SVG.
//!
//! Structured reports are JSON objects with the keys
//!
//! | key | type |
//! |-----|------|
//! | `channel` | `"P_over_theta"` or `"Q_over_V"` |
//! | `verdict` | `"PASS"`, `"FAIL"` or `"INCOMPLETE"` |
//! | `band_hz` | `[f_lo, f_hi]` |
//! | `worst_margin_db` | number or `null` |
//! | `worst_frequency_hz` | number or `null` |
//! | `coverage_ok` | boolean |
//! | `tolerance_db` | number |
//! | `points` | array of `{f_hz, scan_magnitude, envelope_minimum, margin_db}` |
//!
//! A margin of `null` inside `points` stands for a zero scan magnitude.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{render_svg, ComplianceReport, PointMargin, Verdict};
use crate::envelope::{Channel, ComplianceEnvelope};
use crate::error::invalid;
use crate::io::{fmt_e12, parse_field, write_atomic};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Text,
    Structured,
    Csv,
    Svg,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Structured => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Svg => "svg",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "structured" | "json" => Ok(ReportFormat::Structured),
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            _ => Err(invalid(format!("unknown report format `{s}`"))),
        }
    }
}

/// Serialized shape of a structured report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub channel: Channel,
    pub verdict: Verdict,
    pub band_hz: [f64; 2],
    pub worst_margin_db: Option<f64>,
    pub worst_frequency_hz: Option<f64>,
    pub coverage_ok: bool,
    pub tolerance_db: f64,
    pub points: Vec<PointMargin>,
}

impl From<&ComplianceReport> for ReportDocument {
    fn from(r: &ComplianceReport) -> Self {
        Self {
            channel: r.channel,
            verdict: r.verdict,
            band_hz: r.band_hz,
            worst_margin_db: r.worst_margin_db,
            worst_frequency_hz: r.worst_frequency_hz,
            coverage_ok: r.coverage_ok,
            tolerance_db: r.tolerance_db,
            points: r.per_point.clone(),
        }
    }
}

impl ComplianceReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "channel:        {}", self.channel);
        let _ = writeln!(s, "verdict:        {}", self.verdict);
        let _ = writeln!(s, "band:           {:.4} .. {:.4} Hz", self.band_hz[0], self.band_hz[1]);
        let _ = writeln!(s, "points in band: {}", self.per_point.len());
        let _ = writeln!(s, "coverage ok:    {}", self.coverage_ok);
        let _ = writeln!(s, "tolerance:      {} dB", self.tolerance_db);
        match (self.worst_margin_db, self.worst_frequency_hz) {
            (Some(m), Some(f)) => {
                let _ = writeln!(s, "worst margin:   {m:+.4} dB at {f:.4} Hz");
            }
            _ => {
                let _ = writeln!(s, "worst margin:   n/a");
            }
        }
        let n_viol = self.violations().count();
        if n_viol > 0 {
            let _ = writeln!(s, "violations:     {n_viol}");
        }
        s
    }

    pub fn to_structured(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&ReportDocument::from(self))?;
        text.push('\n');
        Ok(text)
    }

    /// `f_hz,scan_magnitude,envelope_minimum,margin_db` at `%.12e`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("f_hz,scan_magnitude,envelope_minimum,margin_db\n");
        for p in &self.per_point {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_e12(p.f_hz),
                fmt_e12(p.scan_magnitude),
                fmt_e12(p.envelope_minimum),
                fmt_e12(p.margin_db)
            );
        }
        s
    }
}

/// Reads the per-point CSV written by [`ComplianceReport::to_csv`].
pub fn read_points_csv(reader: impl Read) -> Result<Vec<PointMargin>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["f_hz", "scan_magnitude", "envelope_minimum", "margin_db"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse { line: 1, msg: format!("expected header {}", expected.join(",")) });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| parse_field(rec.get(i).unwrap_or(""), line, expected[i]);
        out.push(PointMargin { f_hz: get(0)?, scan_magnitude: get(1)?, envelope_minimum: get(2)?, margin_db: get(3)? });
    }
    Ok(out)
}

/// Writes `{stem}.{ext}` into `out_dir` for each requested format and returns
/// the paths written.
pub fn render_report(
    report: &ComplianceReport,
    env: &ComplianceEnvelope,
    formats: &[ReportFormat],
    out_dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &fmt in formats {
        let body = match fmt {
            ReportFormat::Text => report.to_text(),
            ReportFormat::Structured => report.to_structured()?,
            ReportFormat::Csv => report.to_csv(),
            ReportFormat::Svg => render_svg(report, env),
        };
        let path = out_dir.join(format!("{stem}.{}", fmt.extension()));
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compliance::check_compliance;
    use crate::envelope::{build_envelope, preset, EnvelopeOptions, Preset};
    use crate::io::log_grid;
    use crate::jacobian::JacobianScan;
    use num_complex::Complex64;

    fn report() -> (ComplianceReport, ComplianceEnvelope) {
        let env = build_envelope(&preset(Preset::ErcotQ), &EnvelopeOptions::default()).unwrap();
        let f = log_grid(1.0, 30.0, 40);
        let v = f.iter().map(|&f| Complex64::new(0.0, 1.0 + 0.3 * (f / 7.0).ln())).collect();
        let scan = JacobianScan::new(f, None, Some(v), None, None).unwrap();
        (check_compliance(&scan, &env, 0.0).unwrap(), env)
    }

    #[test]
    fn csv_round_trip_is_exact_at_print_precision() {
        let (r, _) = report();
        let text = r.to_csv();
        let back = read_points_csv(text.as_bytes()).unwrap();
        let again = ComplianceReport { per_point: back, ..r.clone() }.to_csv();
        assert_eq!(text, again);
    }

    #[test]
    fn structured_report_has_documented_keys() {
        let (r, _) = report();
        let v: serde_json::Value = serde_json::from_str(&r.to_structured().unwrap()).unwrap();
        for key in ["channel", "verdict", "band_hz", "worst_margin_db", "worst_frequency_hz", "points"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["channel"], "Q_over_V");
        assert!(v["points"][0].get("margin_db").is_some());
    }

    #[test]
    fn writes_every_requested_format() {
        let (r, env) = report();
        let dir = tempfile::tempdir().unwrap();
        let all = [ReportFormat::Text, ReportFormat::Structured, ReportFormat::Csv, ReportFormat::Svg];
        let paths = render_report(&r, &env, &all, dir.path(), "q_v").unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.exists()));
        assert!(render_report(&r, &env, &all, &dir.path().join("missing/sub"), "x").is_err());
    }
}
