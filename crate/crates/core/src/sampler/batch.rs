//! Columnar sample containers and their CSV/JSON serialization.
//!
//! Triples are stored column-wise in generation order together with the
//! metadata needed to reproduce or verify them (seed, shape k, target
//! matrix). CSV output uses 17 significant decimal digits so that parsing
//! recovers every double bit-exactly; a JSON sidecar `<path>.meta.json`
//! carries the metadata.

use crate::corrmat::CorrelationMatrix3;
use crate::sampler::BetaParameter;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Errors from batch serialization and parsing.
#[derive(Debug, Error)]
pub enum BatchError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata encoding error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Generation metadata attached to a batch of triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub seed: u64,
    pub k: f64,
    pub target: CorrelationMatrix3,
    pub n: usize,
}

/// Columnar record of generated (X, Y, Z) triples in (0,1)^3.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub k: BetaParameter,
    pub target: CorrelationMatrix3,
    pub seed: u64,
}

impl SampleBatch {
    pub(crate) fn with_capacity(
        n: usize,
        k: BetaParameter,
        target: CorrelationMatrix3,
        seed: u64,
    ) -> Self {
        Self {
            xs: Vec::with_capacity(n),
            ys: Vec::with_capacity(n),
            zs: Vec::with_capacity(n),
            k,
            target,
            seed,
        }
    }

    /// Rebuilds a batch from parsed columns plus externally supplied metadata.
    pub fn from_columns(
        xs: Vec<f64>,
        ys: Vec<f64>,
        zs: Vec<f64>,
        k: BetaParameter,
        target: CorrelationMatrix3,
        seed: u64,
    ) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert_eq!(xs.len(), zs.len());
        Self {
            xs,
            ys,
            zs,
            k,
            target,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub(crate) fn push(&mut self, x: f64, y: f64, z: f64) {
        self.xs.push(x);
        self.ys.push(y);
        self.zs.push(z);
    }

    pub fn metadata(&self) -> BatchMetadata {
        BatchMetadata {
            seed: self.seed,
            k: self.k.get(),
            target: self.target,
            n: self.n(),
        }
    }

    /// Writes `x,y,z` rows with round-trip-exact decimals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), BatchError> {
        writeln!(w, "x,y,z")?;
        for i in 0..self.n() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.xs[i], self.ys[i], self.zs[i]
            )?;
        }
        Ok(())
    }

    /// Writes the CSV to `path` and the metadata sidecar to `<path>.meta.json`.
    /// Returns the sidecar path.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf, BatchError> {
        let mut csv = BufWriter::new(File::create(path)?);
        self.write_csv(&mut csv)?;
        csv.flush()?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.metadata())?;
        std::fs::write(&sidecar, json + "\n")?;
        Ok(sidecar)
    }
}

/// `<path>.meta.json` next to a CSV output path.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Three equal-length coordinate columns parsed from a CSV.
pub type XyzColumns = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Parses an `x,y,z` CSV back into columns.
pub fn read_xyz_csv<R: BufRead>(r: R) -> Result<XyzColumns, BatchError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zs = Vec::new();
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(BatchError::Header {
                expected: "x,y,z".into(),
                found: "<empty file>".into(),
            })
        }
    };
    if header.trim() != "x,y,z" {
        return Err(BatchError::Header {
            expected: "x,y,z".into(),
            found: header,
        });
    }
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0f64; 3];
        let mut fields = line.split(',');
        for slot in &mut row {
            let field = fields.next().ok_or_else(|| BatchError::Malformed {
                line: lineno,
                reason: "expected 3 fields".into(),
            })?;
            *slot = field.trim().parse().map_err(|e| BatchError::Malformed {
                line: lineno,
                reason: format!("{field:?}: {e}"),
            })?;
            if !slot.is_finite() {
                return Err(BatchError::Malformed {
                    line: lineno,
                    reason: format!("non-finite value {field:?}"),
                });
            }
        }
        if fields.next().is_some() {
            return Err(BatchError::Malformed {
                line: lineno,
                reason: "expected 3 fields".into(),
            });
        }
        xs.push(row[0]);
        ys.push(row[1]);
        zs.push(row[2]);
    }
    Ok((xs, ys, zs))
}

/// Columnar record of generated (X, Y) pairs in (0,1)^2.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub k: BetaParameter,
    pub r: f64,
    pub seed: u64,
}

/// Metadata sidecar for pair batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMetadata {
    pub seed: u64,
    pub k: f64,
    pub r: f64,
    pub n: usize,
}

impl PairBatch {
    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn metadata(&self) -> PairMetadata {
        PairMetadata {
            seed: self.seed,
            k: self.k.get(),
            r: self.r,
            n: self.n(),
        }
    }

    /// Writes `x,y` rows with round-trip-exact decimals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), BatchError> {
        writeln!(w, "x,y")?;
        for i in 0..self.n() {
            writeln!(w, "{:.16e},{:.16e}", self.xs[i], self.ys[i])?;
        }
        Ok(())
    }

    /// Writes the CSV to `path` and the metadata sidecar to `<path>.meta.json`.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf, BatchError> {
        let mut csv = BufWriter::new(File::create(path)?);
        self.write_csv(&mut csv)?;
        csv.flush()?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.metadata())?;
        std::fs::write(&sidecar, json + "\n")?;
        Ok(sidecar)
    }
}
