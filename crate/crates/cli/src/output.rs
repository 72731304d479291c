use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde_json::Value;

use crate::{Format, OutputArgs};

pub struct Report {
    pub json: Value,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    /// One-line description of a witness or failure, echoed to stderr.
    pub finding: Option<String>,
    /// Overrides the witness rule for the exit status.
    pub exit_one: Option<bool>,
}

impl Report {
    pub fn new<H: Into<String>>(json: Value, csv_header: Vec<H>, csv_rows: Vec<Vec<String>>) -> Self {
        Report {
            json,
            csv_header: csv_header.into_iter().map(Into::into).collect(),
            csv_rows,
            finding: None,
            exit_one: None,
        }
    }

    /// Exit status 1 iff the report carries a top-level witness, unless
    /// overridden.
    pub fn failed(&self) -> bool {
        self.exit_one.unwrap_or_else(|| self.json.get("witness").is_some())
    }
}

fn render(report: &Report, format: Format) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report.json)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.csv_header)?;
            for row in &report.csv_rows {
                w.write_record(row)?;
            }
            Ok(w.into_inner().context("flushing CSV")?)
        }
    }
}

/// Temp file in the destination directory, then rename, so readers never
/// see a partial report.
fn write_atomically(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn emit(report: &Report, args: &OutputArgs) -> anyhow::Result<()> {
    let bytes = render(report, args.format)?;
    match &args.out {
        Some(path) => write_atomically(path, &bytes),
        None => {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}
