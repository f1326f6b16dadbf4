use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use picod::verify::{suite, Report};

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes `text` plus a newline to `path`, or to stdout.
pub fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            writeln!(f, "{text}").with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Appends one row per report, writing the header when the file is new or empty.
pub fn write_csv(path: &Path, reports: &[Report]) -> Result<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(suite::CSV_HEADER)?;
    }
    for r in reports {
        w.write_record(suite::csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}
