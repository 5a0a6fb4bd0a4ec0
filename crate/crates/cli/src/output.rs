//! Row schemas and their CSV / JSON serialization.
//!
//! Both formats carry the same columns in the same order. Absent values are
//! empty CSV cells and JSON `null`s.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "SHORTAGE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Resampling,
    MonteCarlo,
    PaperReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Pass,
    Fail,
    SoftWarn,
}

impl Check {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }
}

/// One value produced by a single-configuration mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub mode: &'static str,
    pub quantity: &'static str,
    pub lambda: Option<f64>,
    pub nu: Option<f64>,
    pub m: usize,
    pub k: usize,
    pub n_x: Option<usize>,
    pub n_y: Option<usize>,
    pub r: Option<usize>,
    pub alpha_x: Option<usize>,
    pub alpha_y: Option<usize>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub provenance: Provenance,
    pub check: Option<Check>,
}

pub fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> CliResult<()> {
    let err = |e: &dyn std::fmt::Display| CliError::Output(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row).map_err(|e| err(&e))?;
            }
            w.flush().map_err(|e| err(&e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(|e| err(&e))?;
            writeln!(out).map_err(|e| err(&e))?;
        }
    }
    Ok(())
}

/// Joins a relative `path` onto `dir` when one is given.
pub fn resolve_output_path(path: &Path, dir: Option<&Path>) -> PathBuf {
    match dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes to `path` (created with its parent directories) or to stdout.
pub fn emit<T: Serialize>(rows: &[T], format: Format, path: Option<&Path>) -> CliResult<()> {
    match path {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_rows(rows, format, &mut lock)
        }
        Some(path) => {
            let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
            let path = resolve_output_path(path, env_dir.as_deref());
            let io = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io)?;
            }
            let mut buf = Vec::new();
            write_rows(rows, format, &mut buf)?;
            std::fs::write(&path, buf).map_err(io)
        }
    }
}
