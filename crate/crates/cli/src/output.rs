//! CSV tables, verdict lines and run artifacts.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;

/// Number formatting used in every artifact: shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Provenance record, then the column header, then the rows.
    pub fn to_csv(&self, config_hash: &str, seed: u64) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().flexible(true).terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(["config_sha256", config_hash, "seed", &seed.to_string()])?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Verdict {
        Verdict { label: label.into(), pass, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.label, self.detail)
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}
