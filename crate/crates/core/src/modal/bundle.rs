//! Matrix bundle files.
//!
//! A bundle is a TOML header followed by dense CSV blocks:
//!
//! ```text
//! [model]
//! n = 4          # states
//! m = 2          # outputs
//!
//! [state_groups]
//! ibr1 = [0, 1]
//! ibr2 = [2, 3]
//!
//! [output_pairs]
//! bus1 = [0, 1]  # (vD row, vQ row) of C
//!
//! %% A
//! <n rows of n comma-separated numbers>
//! %% C
//! <m rows of n comma-separated numbers>
//! ```
//!
//! Lines starting with `#` and blank lines inside the blocks are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StateSpaceModel;
use crate::io::{fmt_e12, parse_field, write_atomic};
use crate::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Header {
    model: Dims,
    #[serde(default)]
    state_groups: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    output_pairs: BTreeMap<String, [usize; 2]>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Dims {
    n: usize,
    m: usize,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: line as u64, msg: msg.into() }
}

pub fn parse_bundle(text: &str) -> Result<StateSpaceModel> {
    let lines: Vec<&str> = text.lines().collect();
    let first_block = lines.iter().position(|l| l.trim_start().starts_with("%%")).unwrap_or(lines.len());
    let header: Header = toml::from_str(&lines[..first_block].join("\n"))?;
    let (n, m) = (header.model.n, header.model.m);

    let mut blocks: BTreeMap<String, (usize, Vec<Vec<f64>>)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in lines.iter().enumerate().skip(first_block) {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix("%%") {
            let name = name.trim().to_string();
            if name != "A" && name != "C" {
                return Err(parse_err(line_no, format!("unknown block `{name}` (expected A or C)")));
            }
            if blocks.contains_key(&name) {
                return Err(parse_err(line_no, format!("block `{name}` appears twice")));
            }
            blocks.insert(name.clone(), (line_no, Vec::new()));
            current = Some(name);
            continue;
        }
        let name = current.as_ref().ok_or_else(|| parse_err(line_no, "data outside a block"))?;
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, f)| parse_field(f, line_no as u64, &format!("{name}[{j}]")))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(parse_err(line_no, format!("block {name} row has {} entries, expected {n}", row.len())));
        }
        blocks.get_mut(name).unwrap().1.push(row);
    }

    let mut take = |name: &str, rows: usize| -> Result<DMatrix<f64>> {
        let (at, data) =
            blocks.remove(name).ok_or_else(|| parse_err(lines.len(), format!("missing block `%% {name}`")))?;
        if data.len() != rows {
            return Err(parse_err(at, format!("block {name} has {} rows, expected {rows}", data.len())));
        }
        let flat: Vec<f64> = data.into_iter().flatten().collect();
        Ok(DMatrix::from_row_slice(rows, n, &flat))
    };
    let a = take("A", n)?;
    let c = take("C", m)?;
    let pairs = header.output_pairs.into_iter().map(|(k, [d, q])| (k, (d, q))).collect();
    StateSpaceModel::new(a, c, header.state_groups, pairs)
}

pub fn load_bundle(path: &Path) -> Result<StateSpaceModel> {
    parse_bundle(&std::fs::read_to_string(path)?)
}

/// Serializes a model as a bundle with `%.12e` entries.
pub fn write_bundle(model: &StateSpaceModel, path: &Path) -> Result<()> {
    write_atomic(path, bundle_string(model)?.as_bytes())
}

pub(crate) fn bundle_string(model: &StateSpaceModel) -> Result<String> {
    let header = Header {
        model: Dims { n: model.n_states(), m: model.n_outputs() },
        state_groups: model.state_groups().clone(),
        output_pairs: model.output_pairs().iter().map(|(k, &(d, q))| (k.clone(), [d, q])).collect(),
    };
    let mut s = toml::to_string(&header).map_err(|e| crate::error::invalid(e.to_string()))?;
    for (name, mat) in [("A", model.a()), ("C", model.c())] {
        let _ = writeln!(s, "\n%% {name}");
        for r in 0..mat.nrows() {
            let row: Vec<String> = mat.row(r).iter().map(|v| fmt_e12(*v)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
    }
    Ok(s)
}
