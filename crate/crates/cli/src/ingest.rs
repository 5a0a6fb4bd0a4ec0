//! Sample files: UTF-8 text, one nonnegative decimal per line. Blank lines
//! and lines starting with `#` are skipped.

use std::path::Path;

use shortage_core::Sample;

use crate::error::{CliError, CliResult};

pub fn ingest_sample(path: &Path) -> CliResult<Sample> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_sample(&text, path)
}

/// Parses file contents; `origin` only labels errors.
pub fn parse_sample(text: &str, origin: &Path) -> CliResult<Sample> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| CliError::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            text: line.to_string(),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(CliError::InvalidValue {
                path: origin.to_path_buf(),
                line: i + 1,
                value,
            });
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(CliError::EmptyFile {
            path: origin.to_path_buf(),
        });
    }
    Ok(Sample::new(values)?)
}
