//! Shared file helpers: C-style `%.12e` number formatting, atomic writes and
//! log-spaced grids.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::Result;

/// Formats `x` the way C's `printf("%.12e", x)` does, e.g. `1.500000000000e+00`.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let s = format!("{:.12e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".to_string());
    let tmp = match dir {
        Some(d) => d.join(format!(".{name}.tmp")),
        None => Path::new(&format!(".{name}.tmp")).to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `n` logarithmically spaced points from `lo` to `hi`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| if k == n - 1 { hi } else { (a + (b - a) * k as f64 / (n - 1) as f64).exp() }).collect()
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi`, both ends included.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Parses one numeric CSV field, reporting the 1-based line number on failure.
pub(crate) fn parse_field(field: &str, line: u64, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| crate::Error::Parse {
        line,
        msg: format!("column `{column}`: cannot parse `{field}` as a number"),
    })
}
