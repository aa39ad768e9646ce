//! Bode-magnitude plot of a compliance check as a standalone SVG.

use std::fmt::Write as _;

use super::{ComplianceReport, MARGIN_ROUNDOFF_DB};
use crate::envelope::ComplianceEnvelope;
use crate::io::log_grid;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const ENVELOPE_SAMPLES: usize = 200;

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, f: f64) -> f64 {
        LEFT + (f.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v_db: f64) -> f64 {
        let v = v_db.clamp(self.y0, self.y1);
        TOP + (self.y1 - v) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

/// Envelope (solid line), non-compliance region below it (shaded), scan
/// magnitudes (markers, violations in class `violation`), and an annotation
/// at the worst point. Frequencies are on a log axis, magnitude in dB.
pub fn render_svg(report: &ComplianceReport, env: &ComplianceEnvelope) -> String {
    let title = format!("{} compliance: {}", report.channel, report.verdict);
    plot(env, &title, Some(report))
}

/// The envelope and its shaded non-compliance region, with no scan overlay.
pub fn render_envelope_svg(env: &ComplianceEnvelope) -> String {
    plot(env, &format!("{} minimum-magnitude envelope", env.channel), None)
}

fn plot(env: &ComplianceEnvelope, title: &str, report: Option<&ComplianceReport>) -> String {
    let curve: Vec<(f64, f64)> = log_grid(env.f_lo, env.f_hi, ENVELOPE_SAMPLES)
        .into_iter()
        .map(|f| (f, db(env.magnitude_unchecked(f))))
        .collect();
    let scan: Vec<(f64, f64, bool)> = report.map_or_else(Vec::new, |r| {
        r.per_point
            .iter()
            .map(|p| (p.f_hz, db(p.scan_magnitude), p.margin_db < -r.tolerance_db - MARGIN_ROUNDOFF_DB))
            .collect()
    });

    let finite = curve.iter().map(|c| c.1).chain(scan.iter().map(|s| s.1)).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let step = nice_step((hi - lo).max(1.0) + 6.0);
    let axes = Axes {
        x0: env.f_lo.log10() - 0.05,
        x1: env.f_hi.log10() + 0.05,
        y0: ((lo - 3.0) / step).floor() * step,
        y1: ((hi + 3.0) / step).ceil() * step,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(
        "<style>.grid{stroke:#ddd;stroke-width:1}.axis{stroke:#000;stroke-width:1}\
         .envelope{fill:none;stroke:#c00;stroke-width:2}.noncompliant{fill:#f4b4b4;fill-opacity:0.5}\
         .scanline{fill:none;stroke:#036;stroke-width:1.5}.scan{fill:#036}.scan.violation{fill:#e00}</style>\n",
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">{title}</text>"#, WIDTH / 2.0);

    // decade and 2/5 sub-decade grid lines
    let mut d = axes.x0.floor() as i32;
    while (d as f64) <= axes.x1 {
        for m in [1.0, 2.0, 5.0] {
            let f = m * 10f64.powi(d);
            let lf = f.log10();
            if lf >= axes.x0 && lf <= axes.x1 {
                let x = axes.px(f);
                let _ = writeln!(
                    s,
                    r#"<line class="grid" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}"/>"#,
                    HEIGHT - BOTTOM
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    HEIGHT - BOTTOM + 18.0,
                    f
                );
            }
        }
        d += 1;
    }
    let mut v = axes.y0;
    while v <= axes.y1 + 1e-9 {
        let y = axes.py(v);
        let _ = writeln!(s, r#"<line class="grid" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, WIDTH - RIGHT);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, v);
        v += step;
    }
    let _ = writeln!(
        s,
        r#"<rect class="axis" x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">frequency (Hz)</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">magnitude (dB {})</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        env.channel.units()
    );

    // shaded region between the envelope and the bottom of the plot
    let bottom = axes.py(axes.y0);
    let mut poly = format!("{:.2},{:.2}", axes.px(env.f_lo), bottom);
    for &(f, v) in &curve {
        let _ = write!(poly, " {:.2},{:.2}", axes.px(f), axes.py(v));
    }
    let _ = write!(poly, " {:.2},{:.2}", axes.px(env.f_hi), bottom);
    let _ = writeln!(s, r#"<polygon class="noncompliant" points="{poly}"/>"#);
    let line: Vec<String> = curve.iter().map(|&(f, v)| format!("{:.2},{:.2}", axes.px(f), axes.py(v))).collect();
    let _ = writeln!(s, r#"<polyline class="envelope" points="{}"/>"#, line.join(" "));
    if let Some(fi) = env.f_int {
        let x = axes.px(fi);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{bottom:.2}" stroke="#c00" stroke-dasharray="4 4"/>"##
        );
    }

    if !scan.is_empty() {
        let pts: Vec<String> = scan.iter().map(|&(f, v, _)| format!("{:.2},{:.2}", axes.px(f), axes.py(v))).collect();
        let _ = writeln!(s, r#"<polyline class="scanline" points="{}"/>"#, pts.join(" "));
        for &(f, v, bad) in &scan {
            let class = if bad { "scan violation" } else { "scan" };
            let _ = writeln!(s, r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="3.5"/>"#, axes.px(f), axes.py(v));
        }
    }

    if let Some((report, m, f)) = report.and_then(|r| Some((r, r.worst_margin_db?, r.worst_frequency_hz?))) {
        let scan_db = report.per_point.iter().find(|p| p.f_hz == f).map_or(axes.y0, |p| db(p.scan_magnitude));
        let (x, y) = (axes.px(f), axes.py(scan_db));
        let anchor = if x > WIDTH / 2.0 { "end" } else { "start" };
        let dx = if x > WIDTH / 2.0 { -10.0 } else { 10.0 };
        let _ = writeln!(
            s,
            r#"<circle class="worst" cx="{x:.2}" cy="{y:.2}" r="7" fill="none" stroke="black"/><text class="worst" x="{:.2}" y="{:.2}" text-anchor="{anchor}">worst: {f:.3} Hz, {m:+.3} dB</text>"#,
            x + dx,
            y - 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}
