use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use vsbi_core::io::fmt_e12;
use vsbi_core::modal::{
    load_bundle, modal_observability, participation_factors, ObservabilityReport, ParticipationReport,
};
use vsbi_core::{compute_modes, Mode};

use crate::output::{to_json, FormatArg, Output};
use crate::GlobalArgs;

#[derive(Serialize)]
struct ModeRow<'a> {
    rank: usize,
    lambda_re: f64,
    lambda_im: f64,
    frequency_hz: f64,
    damping_pct: Option<f64>,
    multiplicity: usize,
    reliable: bool,
    least_damped: bool,
    participation: &'a BTreeMap<String, f64>,
    observability: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct ModalDocument<'a> {
    n_states: usize,
    condition_number: f64,
    warnings: &'a [String],
    modes: Vec<ModeRow<'a>>,
}

struct Analysed {
    mode: Mode,
    participation: ParticipationReport,
    observability: ObservabilityReport,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_e12)
}

fn modes_csv(rows: &[Analysed]) -> String {
    let mut s = String::from("rank,lambda_re,lambda_im,frequency_hz,damping_pct,multiplicity,reliable\n");
    for (i, a) in rows.iter().enumerate() {
        let m = &a.mode;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i + 1,
            fmt_e12(m.lambda.re),
            fmt_e12(m.lambda.im),
            fmt_e12(m.frequency_hz),
            opt(m.damping_pct),
            m.multiplicity,
            m.reliable
        );
    }
    s
}

fn per_mode_csv<'a>(
    rows: &'a [Analysed],
    key: &str,
    values: impl Fn(&'a Analysed) -> Vec<(&'a str, String)>,
) -> String {
    let mut s = format!("rank,lambda_re,lambda_im,{key}\n");
    for (i, a) in rows.iter().enumerate() {
        for (name, cols) in values(a) {
            let _ = writeln!(s, "{},{},{},{name},{cols}", i + 1, fmt_e12(a.mode.lambda.re), fmt_e12(a.mode.lambda.im));
        }
    }
    s
}

fn lambda_text(m: &Mode) -> String {
    if m.multiplicity == 2 {
        format!("{:.4} ± {:.4}j", m.lambda.re, m.lambda.im.abs())
    } else {
        format!("{:.4}", m.lambda.re)
    }
}

pub fn run(global: &GlobalArgs, bundle: &Path) -> Result<u8> {
    let model = load_bundle(bundle).with_context(|| format!("cannot load bundle {}", bundle.display()))?;
    let analysis = compute_modes(&model)?;
    for w in &analysis.warnings {
        eprintln!("warning: {w}");
    }
    let rows = analysis
        .modes
        .iter()
        .map(|m| {
            Ok(Analysed {
                participation: participation_factors(&model, m)?,
                observability: modal_observability(&model, m)?,
                mode: m.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = rows.first() {
        for g in &first.participation.empty_groups {
            eprintln!("warning: state group `{g}` is empty");
        }
        for w in &first.observability.warnings {
            eprintln!("warning: {w}");
        }
    }

    println!("{:>4}  {:>26}  {:>10}  {:>11}  {:>4}", "rank", "eigenvalue", "freq (Hz)", "damping (%)", "mult");
    for (i, a) in rows.iter().enumerate() {
        let m = &a.mode;
        let damping = m.damping_pct.map_or_else(|| "n/a".to_string(), |d| format!("{d:.4}"));
        let mut line = format!(
            "{:>4}  {:>26}  {:>10.4}  {:>11}  {:>4}",
            i + 1,
            lambda_text(m),
            m.frequency_hz,
            damping,
            m.multiplicity
        );
        if i == 0 {
            line.push_str("  <- least damped");
        }
        if !m.reliable {
            line.push_str("  (unreliable)");
        }
        println!("{line}");
    }
    if let Some(worst) = rows.first() {
        let mut ranked: Vec<(&String, &f64)> = worst.participation.normalized.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
        let parts: Vec<String> = ranked.iter().map(|(k, v)| format!("{k} {v:.3}")).collect();
        println!("least damped mode participation: {}", parts.join(", "));
        if global.verbose {
            let obs: Vec<String> = worst.observability.per_bus.iter().map(|(k, v)| format!("{k} {v:.4}")).collect();
            println!("least damped mode observability: {}", obs.join(", "));
            println!("eigenvector condition number: {:.3e}", analysis.condition_number);
        }
    }

    let mut out = Output::new(&global.out_dir, &global.format)?;
    out.put_if(FormatArg::Csv, "modes.csv", || Ok(modes_csv(&rows)))?;
    out.put_if(FormatArg::Csv, "participation.csv", || {
        Ok(per_mode_csv(&rows, "device,raw,normalized", |a| {
            a.participation
                .raw
                .iter()
                .map(|(k, v)| (k.as_str(), format!("{},{}", fmt_e12(*v), fmt_e12(a.participation.normalized[k]))))
                .collect()
        }))
    })?;
    out.put_if(FormatArg::Csv, "observability.csv", || {
        Ok(per_mode_csv(&rows, "bus,observability", |a| {
            a.observability.per_bus.iter().map(|(k, v)| (k.as_str(), fmt_e12(*v))).collect()
        }))
    })?;
    out.put_if(FormatArg::Structured, "modal.json", || {
        to_json(&ModalDocument {
            n_states: model.n_states(),
            condition_number: analysis.condition_number,
            warnings: &analysis.warnings,
            modes: rows
                .iter()
                .enumerate()
                .map(|(i, a)| ModeRow {
                    rank: i + 1,
                    lambda_re: a.mode.lambda.re,
                    lambda_im: a.mode.lambda.im,
                    frequency_hz: a.mode.frequency_hz,
                    damping_pct: a.mode.damping_pct,
                    multiplicity: a.mode.multiplicity,
                    reliable: a.mode.reliable,
                    least_damped: i == 0,
                    participation: &a.participation.normalized,
                    observability: &a.observability.per_bus,
                })
                .collect(),
        })
    })?;
    out.finish();
    Ok(0)
}
