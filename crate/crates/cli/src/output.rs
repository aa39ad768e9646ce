use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use vsbi_core::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum FormatArg {
    Csv,
    Svg,
    Structured,
    All,
}

/// Writes named files into the output directory, skipping formats the user
/// did not ask for.
pub struct Output {
    dir: PathBuf,
    formats: BTreeSet<FormatArg>,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, formats: &[FormatArg]) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let formats = if formats.contains(&FormatArg::All) {
            [FormatArg::Csv, FormatArg::Svg, FormatArg::Structured].into()
        } else {
            formats.iter().copied().collect()
        };
        Ok(Self { dir: dir.to_path_buf(), formats, written: Vec::new() })
    }

    pub fn wants(&self, f: FormatArg) -> bool {
        self.formats.contains(&f)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes unconditionally.
    pub fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes only when `format` was selected; `contents` is not built otherwise.
    pub fn put_if(&mut self, format: FormatArg, name: &str, contents: impl FnOnce() -> Result<String>) -> Result<()> {
        if self.wants(format) {
            let body = contents()?;
            self.put(name, &body)?;
        }
        Ok(())
    }

    pub fn record(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.written.extend(paths);
    }

    pub fn finish(self) {
        for p in &self.written {
            println!("wrote {}", p.display());
        }
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
