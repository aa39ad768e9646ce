use std::path::Path;

use anyhow::{Context, Result};
use vsbi_core::compliance::{render_report, ReportFormat};
use vsbi_core::jacobian::load_scan;
use vsbi_core::{check_compliance, Verdict};

use crate::criteria::CriteriaArgs;
use crate::output::{FormatArg, Output};
use crate::GlobalArgs;

pub fn run(global: &GlobalArgs, scan_path: &Path, criteria: &CriteriaArgs) -> Result<u8> {
    let (_, _, env) = criteria.envelope()?;
    let scan = load_scan(scan_path).with_context(|| format!("cannot read scan {}", scan_path.display()))?;
    let report = check_compliance(&scan, &env, global.tolerance_db)?;
    print!("{}", report.to_text());

    let mut out = Output::new(&global.out_dir, &global.format)?;
    let formats: Vec<ReportFormat> = [
        (FormatArg::Csv, ReportFormat::Csv),
        (FormatArg::Structured, ReportFormat::Structured),
        (FormatArg::Svg, ReportFormat::Svg),
    ]
    .into_iter()
    .filter(|(f, _)| out.wants(*f))
    .map(|(_, r)| r)
    .collect();
    let written = render_report(&report, &env, &formats, out.dir(), "check")?;
    out.record(written);
    out.finish();

    Ok(match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Incomplete => 3,
    })
}
