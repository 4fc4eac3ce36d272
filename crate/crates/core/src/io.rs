//! CSV and JSON output helpers.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn ensure_parent(path: &Path) -> io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

/// Writes a header row followed by string records.
pub fn write_records<I, R>(path: &Path, header: &[&str], rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.flush()
}

/// Writes purely numeric rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    write_records(path, header, rows.iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, std::f64::consts::PI, 1e-300, -2.5e17] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
