use anyhow::{bail, Result};
use vsbi_core::compliance::render_envelope_svg;

use crate::criteria::CriteriaArgs;
use crate::output::{to_json, FormatArg, Output};
use crate::GlobalArgs;

pub fn run(global: &GlobalArgs, criteria: &CriteriaArgs, points: usize) -> Result<u8> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    let (_, _, env) = criteria.envelope()?;
    let meta = env.metadata();

    println!("channel    {} ({})", meta.channel, meta.units);
    println!("band       {:.4} .. {:.4} Hz", meta.f_lo_hz, meta.f_hi_hz);
    if let Some(fi) = meta.f_int_hz {
        println!("crossover  {fi:.4} Hz");
    }
    for (name, b) in std::iter::once(("LPF", &meta.lpf)).chain(meta.hpf.as_ref().map(|h| ("HPF", h))) {
        println!(
            "{name}        K = {:.6}, zeta = {}, omega_n = {:.4} rad/s, -3 dB at {:.4} Hz",
            b.gain, b.zeta, b.omega_n_rad_s, b.bandwidth_hz
        );
    }

    let mut out = Output::new(&global.out_dir, &global.format)?;
    out.put_if(FormatArg::Csv, "envelope.csv", || Ok(env.to_csv(points)))?;
    out.put_if(FormatArg::Structured, "envelope.json", || to_json(&meta))?;
    out.put_if(FormatArg::Svg, "envelope.svg", || Ok(render_envelope_svg(&env)))?;
    out.finish();
    Ok(0)
}
