//! Column tables written as comma-separated text.
//!
//! The first line is a comment naming the columns (`# t cx cy ...`); every
//! following line holds one row printed with 12 significant digits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{GridResult, ScanResult};
use crate::integrator::Trajectory;
use crate::pulse::SampledWaveform;
use crate::weinorman::BlochTrajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `v` with 12 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.11e}")
    }
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::domain(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// `# t cx cy amp phase`.
    pub fn from_waveform(w: &SampledWaveform) -> Self {
        let amp = w.amplitude();
        let phase = w.phase();
        Table {
            columns: names(&["t", "cx", "cy", "amp", "phase"]),
            rows: (0..w.len())
                .map(|i| vec![w.times[i], w.cx[i], w.cy[i], amp[i], phase[i]])
                .collect(),
        }
    }

    /// `# t g1_re g1_im ... gN_re gN_im`.
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let n = traj.states.first().map_or(0, Vec::len);
        let mut columns = vec!["t".to_string()];
        for k in 1..=n {
            columns.push(format!("g{k}_re"));
            columns.push(format!("g{k}_im"));
        }
        let rows = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, g)| {
                let mut row = Vec::with_capacity(1 + 2 * n);
                row.push(t);
                for z in g {
                    row.push(z.re);
                    row.push(z.im);
                }
                row
            })
            .collect();
        Table { columns, rows }
    }

    /// `# t c1 c2 c3 phase`, real parts of the Cartesian components.
    pub fn from_bloch(b: &BlochTrajectory) -> Self {
        Table {
            columns: names(&["t", "c1", "c2", "c3", "phase"]),
            rows: (0..b.times.len())
                .map(|i| vec![b.times[i], b.c[i][0].re, b.c[i][1].re, b.c[i][2].re, b.phase[i]])
                .collect(),
        }
    }

    /// Axis followed by every series; undefined points become `nan`.
    pub fn from_scan(scan: &ScanResult) -> Self {
        let mut columns = vec![scan.axis_name.clone()];
        columns.extend(scan.series.iter().map(|s| s.name.clone()));
        let rows = scan
            .axis
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut row = vec![x];
                row.extend(scan.series.iter().map(|s| s.values[i].unwrap_or(f64::NAN)));
                row
            })
            .collect();
        Table { columns, rows }
    }

    /// Long format: one row per cell, `# y x value`.
    pub fn from_grid(grid: &GridResult) -> Self {
        let mut rows = Vec::with_capacity(grid.x.len() * grid.y.len());
        for (r, &y) in grid.y.iter().enumerate() {
            for (c, &x) in grid.x.iter().enumerate() {
                rows.push(vec![y, x, grid.values[r][c]]);
            }
        }
        Table {
            columns: vec![grid.y_name.clone(), grid.x_name.clone(), grid.value_name.clone()],
            rows,
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.columns.join(" "));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix('#'))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: "missing `#` header line".into(),
            })?;
        let mut table = Table::new(header.split_whitespace().map(str::to_string).collect());
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            table.push_row(row).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(table)
    }
}

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}

/// Writes `table` to `path`. An empty table is an error and leaves no file.
pub fn emit_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyResult(format!("{}", path.as_ref().display())));
    }
    std::fs::write(path, table.to_csv_string())?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
    Table::parse(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn trajectory_header_and_round_trip() {
        let traj = Trajectory {
            times: vec![0.0, 1.5e-3],
            states: vec![
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -2.0)],
                vec![Complex64::new(0.123456789012345, 1e-300), Complex64::new(-3.0, 7.0)],
            ],
            ..Default::default()
        };
        let t = Table::from_trajectory(&traj);
        let text = t.to_csv_string();
        assert!(text.starts_with("# t g1_re g1_im g2_re g2_im\n"));
        let back = Table::parse(&text).unwrap();
        assert_eq!(back.columns, t.columns);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert!((a - b).abs() <= 1e-11 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_value(-1234.5), "-1.23450000000e3");
    }

    #[test]
    fn empty_table_leaves_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let err = emit_csv(&Table::new(names(&["t"])), &path).unwrap_err();
        assert!(matches!(err, Error::EmptyResult(_)));
        assert!(!path.exists());
    }
}
