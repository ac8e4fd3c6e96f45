//! CSV and JSON rendering. Files are rendered to memory first and written
//! only after every experiment item has finished.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;

/// Round-trip exact: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// `(file name, bytes)` pairs for one report in the requested format.
pub fn render<R: Serialize>(
    stem: &str,
    report: &R,
    tables: &[Table],
    format: Format,
) -> Vec<(String, Vec<u8>)> {
    match format {
        Format::Csv => tables
            .iter()
            .map(|t| (format!("{}.csv", t.name), t.to_csv()))
            .collect(),
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("reports serialize");
            bytes.push(b'\n');
            vec![(format!("{stem}.json"), bytes)]
        }
    }
}

pub fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, bytes)| {
            let p = dir.join(name);
            std::fs::write(&p, bytes)?;
            Ok(p)
        })
        .collect()
}
