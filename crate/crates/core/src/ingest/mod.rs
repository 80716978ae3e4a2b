//! Dataset loading (dense ARFF, headed CSV) and synthetic streams.

mod arff;
mod csv;
mod synth;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use self::arff::{load_arff, read_arff};
pub use self::csv::{load_csv, read_csv, write_csv};
pub use self::synth::{place_centers, synth_centers, synth_gaussian_stream, SynthParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{Instance, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Arff,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "arff" => Some(Format::Arff),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arff" => Ok(Format::Arff),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSource {
    pub path: PathBuf,
    pub format: Format,
    /// Replaces the schema read or inferred from the file.
    pub declared_schema: Option<Schema>,
}

impl DatasetSource {
    pub fn new(path: impl Into<PathBuf>, format: Format) -> Self {
        Self {
            path: path.into(),
            format,
            declared_schema: None,
        }
    }

    /// Loads at most `limit` instances from the head of the file.
    pub fn load<T: Scalar>(&self, limit: Option<usize>) -> Result<(Schema, Vec<Instance<T>>)> {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let reader = BufReader::new(file);
        match self.format {
            Format::Arff => read_arff(reader, self.declared_schema.as_ref(), limit),
            Format::Csv => read_csv(reader, self.declared_schema.as_ref(), limit),
        }
    }
}

/// Shared token conversion for both file formats.
pub(crate) fn parse_numeric<T: Scalar>(token: &str, line: u64, column: &str) -> Result<T> {
    let x: T = token
        .parse()
        .map_err(|_| Error::parse(line, format!("`{token}` is not numeric (column `{column}`)")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{token}` in column `{column}`")));
    }
    Ok(x)
}

pub(crate) fn is_missing(token: &str) -> bool {
    token.is_empty() || token == "?"
}
