use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use vsbi_core::compliance::{render_svg, DecayTime, CROSSCHECK_POINTS};
use vsbi_core::io::{fmt_e12, log_grid};
use vsbi_core::jacobian::JacobianEntry;
use vsbi_core::lti::freq_response;
use vsbi_core::scan::DeviceSpec;
use vsbi_core::{
    check_compliance, time_domain_crosscheck, Channel, EquivalenceReport, JacobianScan, TimeDomainCriteria, Verdict,
};

use crate::criteria::CriteriaArgs;
use crate::output::{to_json, FormatArg, Output};
use crate::GlobalArgs;

#[derive(Serialize)]
struct VerifyDocument<'a> {
    criteria: &'a TimeDomainCriteria,
    #[serde(flatten)]
    report: &'a EquivalenceReport,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_e12)
}

fn to_csv(r: &EquivalenceReport) -> String {
    let decay = match r.decay_time {
        DecayTime::Seconds(t) => fmt_e12(t),
        DecayTime::Never => "never".to_string(),
    };
    let rows: [(&str, String); 12] = [
        ("channel", r.channel.to_string()),
        ("rise_time_s", opt(r.rise_time_s)),
        ("rise_time_0_90_s", opt(r.rise_time_0_90_s)),
        ("peak", fmt_e12(r.peak)),
        ("decay_time_s", decay),
        ("rise_ok", r.rise_ok.to_string()),
        ("peak_ok", r.peak_ok.to_string()),
        ("decay_ok", r.decay_ok.to_string()),
        ("td_verdict", r.td_verdict.to_string()),
        ("fd_verdict", r.fd_verdict.to_string()),
        ("fd_worst_margin_db", opt(r.fd_worst_margin_db)),
        ("consistent", r.consistent.to_string()),
    ];
    let mut s = String::from("metric,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

fn ms(t: Option<f64>) -> String {
    t.map_or_else(|| "n/a".to_string(), |t| format!("{:.4} ms", t * 1e3))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

pub fn run(global: &GlobalArgs, device_path: &Path, criteria_args: &CriteriaArgs) -> Result<u8> {
    let (criteria, options, env) = criteria_args.envelope()?;
    let text =
        std::fs::read_to_string(device_path).with_context(|| format!("cannot read {}", device_path.display()))?;
    let spec = DeviceSpec::from_toml_str(&text).with_context(|| format!("in {}", device_path.display()))?;
    let device = spec.build().with_context(|| format!("device {}", device_path.display()))?;
    let entry = match criteria.channel {
        Channel::PTheta => JacobianEntry::ThetaToP,
        Channel::QV => JacobianEntry::VToQ,
    };
    let tf = device
        .analytic(entry)
        .ok_or_else(|| anyhow!("device has no analytic {} transfer function", criteria.channel))?;
    let report = time_domain_crosscheck(&tf, &criteria, &options)?;

    println!("channel            {}", report.channel);
    println!(
        "rise (10-90 %)     {}  (limit {:.4} ms)  {}",
        ms(report.rise_time_s),
        criteria.rise_time_max * 1e3,
        mark(report.rise_ok)
    );
    if global.verbose {
        println!("rise (0-90 %)      {}", ms(report.rise_time_0_90_s));
    }
    println!("peak               {:.6}  (minimum {})  {}", report.peak, criteria.peak_min, mark(report.peak_ok));
    match criteria.decay_time_min {
        Some(td) => println!(
            "decay              {}  (minimum {:.4} ms)  {}",
            report.decay_time,
            td * 1e3,
            mark(report.decay_ok)
        ),
        None => println!("decay              {}  (no requirement)", report.decay_time),
    }
    println!("time-domain        {}", report.td_verdict);
    match report.fd_worst_margin_db {
        Some(m) => println!("frequency-domain   {}  (worst margin {m:+.4} dB)", report.fd_verdict),
        None => println!("frequency-domain   {}", report.fd_verdict),
    }
    println!("consistent         {}", report.consistent);

    let mut out = Output::new(&global.out_dir, &global.format)?;
    out.put_if(FormatArg::Structured, "verify.json", || {
        to_json(&VerifyDocument { criteria: &criteria, report: &report })
    })?;
    out.put_if(FormatArg::Csv, "verify.csv", || Ok(to_csv(&report)))?;
    out.put_if(FormatArg::Svg, "verify.svg", || {
        // same grid and zero tolerance as the cross-check's own frequency-domain verdict
        let grid = log_grid(env.f_lo, env.f_hi, CROSSCHECK_POINTS);
        let values = Some(freq_response(&tf, &grid)?.values().to_vec());
        let scan = match criteria.channel {
            Channel::PTheta => JacobianScan::new(grid, values, None, None, None)?,
            Channel::QV => JacobianScan::new(grid, None, values, None, None)?,
        };
        Ok(render_svg(&check_compliance(&scan, &env, 0.0)?, &env))
    })?;
    out.finish();

    let pass = report.consistent && report.td_verdict == Verdict::Pass && report.fd_verdict == Verdict::Pass;
    Ok(if pass { 0 } else { 1 })
}
