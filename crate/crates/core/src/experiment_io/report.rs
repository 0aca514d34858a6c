//! CSV time series and JSON-lines reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::DiagnosticRecord;
use crate::error::{Error, Result};
use crate::solver::ConservedSample;

pub const OUTPUT_DIR_VAR: &str = "FKDV_OUTPUT_DIR";

/// `FKDV_OUTPUT_DIR` when set, otherwise `configured`.
pub fn output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => configured.to_path_buf(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn check_aligned(records: &[DiagnosticRecord]) -> Result<usize> {
    let n = records.first().map_or(0, |r| r.series.len());
    if records.iter().any(|r| r.series.len() != n) {
        return Err(Error::Sequencing("records sampled at different times".into()));
    }
    Ok(n)
}

/// `t` followed by the weighted energy of every (window, exponent) pair.
pub fn write_energy_csv(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let n = check_aligned(records)?;
    let mut header = vec!["t".to_string()];
    header.extend(records.iter().map(|r| r.label()));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![records[0].series[i].0];
            row.extend(records.iter().map(|r| r.series[i].1));
            row
        })
        .collect();
    write_table(path, &header, &rows)
}

/// `t` followed by the running strip and Hilbert-twin accumulators.
pub fn write_smoothing_csv(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let n = check_aligned(records)?;
    let mut header = vec!["t".to_string()];
    for r in records {
        header.push(format!("{}_strip", r.label()));
        header.push(format!("{}_hilbert", r.label()));
    }
    let mut acc = vec![(0.0, 0.0); records.len()];
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![records[0].series[i].0];
        for (r, a) in records.iter().zip(acc.iter_mut()) {
            if i > 0 {
                let (p, q) = (&r.strip_series[i - 1], &r.strip_series[i]);
                let h = 0.5 * (q.t - p.t);
                a.0 += h * (p.strip + q.strip);
                a.1 += h * (p.hilbert + q.hilbert);
            }
            row.extend([a.0, a.1]);
        }
        rows.push(row);
    }
    write_table(path, &header, &rows)
}

pub fn write_conserved_csv(path: &Path, log: &[ConservedSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for s in log {
        w.serialize(s).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub struct JsonlWriter {
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(d) = path.parent() {
            fs::create_dir_all(d)?;
        }
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, value).map_err(|e| Error::Serialization(e.to_string()))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{window_family, DiagnosticWindow, Exponent};
    use crate::spectral::{make_grid, Field};
    use crate::weights::Bump;
    use std::sync::Arc;

    fn records() -> Vec<DiagnosticRecord> {
        let w = DiagnosticWindow::new(0.0, 0.5, 2.5, 2.5, 1.0).unwrap();
        let fam = Arc::new(window_family(&w, &Bump::default()).unwrap());
        let g = make_grid(64, 8.0).unwrap();
        let u = Field::from_fn(&g, |x| (-(x * x)).exp()).unwrap();
        let mut rs = vec![
            DiagnosticRecord::for_exponent(w, Exponent::new(2, 0.0), 0.5),
            DiagnosticRecord::for_exponent(w, Exponent::new(2, 0.25), 0.5),
        ];
        for r in rs.iter_mut() {
            for i in 0..3 {
                r.observe(&u, i as f64 * 0.5, &fam).unwrap();
            }
        }
        rs
    }

    #[test]
    fn energy_csv_has_one_column_per_pair() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("energy.csv");
        write_energy_csv(&p, &records()).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,x0=0_v=1_d2D0,x0=0_v=1_d2D0.25");
        assert!(lines[3].starts_with("1,"));
    }

    #[test]
    fn smoothing_csv_ends_at_the_accumulator() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("smoothing.csv");
        let rs = records();
        write_smoothing_csv(&p, &rs).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!((last[1] - rs[0].smoothing_accum).abs() <= 1e-15 * rs[0].smoothing_accum.abs());
        assert!((last[4] - rs[1].hilbert_twin).abs() <= 1e-15 * rs[1].hilbert_twin.abs());
    }

    #[test]
    fn jsonl_lines_parse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/r.jsonl");
        let mut w = JsonlWriter::create(&p).unwrap();
        w.write(&serde_json::json!({"a": 1})).unwrap();
        w.write(&serde_json::json!({"b": [1.5]})).unwrap();
        w.finish().unwrap();
        let text = fs::read_to_string(&p).unwrap();
        for l in text.lines() {
            serde_json::from_str::<serde_json::Value>(l).unwrap();
        }
        assert_eq!(text.lines().count(), 2);
    }
}
