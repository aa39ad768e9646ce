//! Scan settings come from three layers: built-in defaults, an optional TOML
//! config file with the keys of [`ScanSettings`], and command-line flags.
//! Flags win over the file, and the file wins over the defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::de::IntoDeserializer;
use serde::{Deserialize, Serialize};
use vsbi_core::jacobian::JacobianEntry;
use vsbi_core::scan::{run_jacobian_scan, DeviceSpec, ScanConfig, ScanSettings};

use crate::output::{to_json, FormatArg, Output};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Device description file (TOML).
    #[arg(long)]
    pub device: PathBuf,
    /// Scan config file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lowest frequency of the log grid, Hz.
    #[arg(long)]
    pub f_min: Option<f64>,
    /// Highest frequency of the log grid, Hz.
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Number of log-grid points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Explicit frequency list, Hz; replaces the log grid.
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Option<Vec<f64>>,
    /// Perturbation amplitude (rad or p.u.).
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Periods discarded before measuring.
    #[arg(long)]
    pub settle_cycles: Option<u32>,
    /// Whole periods correlated per measurement.
    #[arg(long)]
    pub measure_cycles: Option<u32>,
    /// Upper bound on the integration step, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Minimum settle time, s.
    #[arg(long)]
    pub settle_time: Option<f64>,
    /// Test impedance between source and terminal, p.u.
    #[arg(long)]
    pub z_test: Option<f64>,
    /// Jacobian entries to scan: theta_to_p, v_to_q, v_to_p, theta_to_q.
    #[arg(long, value_delimiter = ',', value_parser = parse_entry)]
    pub entries: Option<Vec<JacobianEntry>>,
}

fn parse_entry(s: &str) -> Result<JacobianEntry, String> {
    JacobianEntry::deserialize(s.into_deserializer()).map_err(|e: serde::de::value::Error| e.to_string())
}

impl ScanArgs {
    fn flag_settings(&self) -> ScanSettings {
        ScanSettings {
            f_min_hz: self.f_min,
            f_max_hz: self.f_max,
            points: self.points,
            frequencies_hz: self.frequencies.clone(),
            amplitude: self.amplitude,
            settle_cycles: self.settle_cycles,
            measure_cycles: self.measure_cycles,
            dt_s: self.dt,
            z_test: self.z_test,
            settle_time_s: self.settle_time,
            entries: self.entries.clone(),
        }
    }

    pub fn resolve(&self) -> Result<ScanConfig> {
        let file = match &self.config {
            Some(p) => ScanSettings::from_toml_str(&read(p)?).with_context(|| format!("in {}", p.display()))?,
            None => ScanSettings::default(),
        };
        Ok(file.overlay(self.flag_settings()).resolve()?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    config: &'a ScanConfig,
    points_measured: usize,
    failures: Vec<Failure<'a>>,
}

#[derive(Serialize)]
struct Failure<'a> {
    freq_hz: f64,
    message: &'a str,
}

pub fn run(global: &GlobalArgs, args: &ScanArgs) -> Result<u8> {
    let spec =
        DeviceSpec::from_toml_str(&read(&args.device)?).with_context(|| format!("in {}", args.device.display()))?;
    let device = spec.build().with_context(|| format!("device {}", args.device.display()))?;
    let cfg = args.resolve()?;
    if global.verbose {
        eprintln!(
            "scanning {} frequencies from {} to {} Hz",
            cfg.frequencies.len(),
            cfg.frequencies[0],
            cfg.frequencies[cfg.frequencies.len() - 1]
        );
    }
    let run = run_jacobian_scan(&device, &cfg)?;
    for f in &run.failures {
        eprintln!("warning: dropped {} Hz: {}", f.freq_hz, f.message);
    }
    println!("measured {} of {} frequencies", run.scan.len(), cfg.frequencies.len());

    let mut out = Output::new(&global.out_dir, &global.format)?;
    out.put("scan.csv", &run.scan.to_csv())?;
    out.put_if(FormatArg::Structured, "scan.json", || {
        to_json(&ScanSummary {
            config: &cfg,
            points_measured: run.scan.len(),
            failures: run.failures.iter().map(|f| Failure { freq_hz: f.freq_hz, message: &f.message }).collect(),
        })
    })?;
    out.finish();
    Ok(0)
}
