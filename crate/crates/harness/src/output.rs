//! Versioned CSV tables and JSON metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::HarnessError;

/// First line of every table.
pub const CSV_MAGIC: &str = "# mg-csv v1";

/// Build description, from `git describe` at compile time.
pub const GIT_DESCRIBE: &str = env!("MG_GIT_DESCRIBE");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt_real(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Seventeen significant digits, which round-trips every `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Real(x) => f.write_str(&format_real(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width does not match header"
        );
        self.rows.push(row);
    }

    /// Serialized table: magic line, header, rows.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "{CSV_MAGIC}").unwrap();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header).unwrap();
            for row in &self.rows {
                w.write_record(row.iter().map(|c| c.to_string())).unwrap();
            }
            w.flush().unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_bytes()).map_err(|e| HarnessError::io(path, e))
    }
}

/// Parses a table written by [`Table::write`], keeping every cell as text.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let body = text
        .strip_prefix(CSV_MAGIC)
        .and_then(|s| s.strip_prefix('\n'))
        .ok_or_else(|| HarnessError::Parse {
            path: path.into(),
            message: format!("missing `{CSV_MAGIC}` line"),
        })?;
    let parse_err = |e: csv::Error| HarnessError::Parse {
        path: path.into(),
        message: e.to_string(),
    };
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r
        .headers()
        .map_err(parse_err)?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(parse_err)?;
    Ok((header, rows))
}

/// Sidecar describing how a set of tables was produced.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub job: String,
    pub description: String,
    pub configs: Vec<serde_json::Value>,
    pub seed_base: u64,
    pub n_samples: usize,
    pub scale: u32,
    pub workers: usize,
    pub tables: Vec<String>,
    pub git_describe: &'static str,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
}

impl Metadata {
    pub fn new(job: &str, description: &str) -> Self {
        Metadata {
            job: job.to_string(),
            description: description.to_string(),
            configs: Vec::new(),
            seed_base: 0,
            n_samples: 0,
            scale: 1,
            workers: 0,
            tables: Vec::new(),
            git_describe: GIT_DESCRIBE,
            started_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or(Duration::ZERO)
                .as_secs(),
            wall_time_s: 0.0,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(self).expect("metadata serializes");
        fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
