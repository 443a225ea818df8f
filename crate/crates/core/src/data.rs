//! Primary-data CSV format.
//!
//! Layout: a header row of feature names, an optional second row beginning
//! `#units:` carrying per-column unit strings (`kg^1*m^2*s^-2`), then numeric
//! rows. The response is either a named column of the same file or a separate
//! single-column CSV.

use crate::descriptor::UnitContext;
use crate::error::{Error, Result};
use crate::units::UnitVec;
use std::io::Read;
use std::path::Path;

/// A column-major numeric table with optional per-column units.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub units: Option<Vec<UnitVec>>,
    pub n_rows: usize,
}

impl Dataset {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Dataset> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("dataset has no columns"));
        }
        let n_rows = columns[0].len();
        if n_rows == 0 {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        if names.len() != columns.len() {
            return Err(Error::Invalid(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::Invalid(format!(
                    "column '{}' has {} rows, expected {}",
                    names[j],
                    col.len(),
                    n_rows
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!(
                    "non-finite value in column '{}' at row {}",
                    names[j], i
                )));
            }
        }
        Ok(Dataset {
            names,
            columns,
            units: None,
            n_rows,
        })
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Unit context for descriptor construction: explicit when the file
    /// carried a units row, dimensionless otherwise (which disables the
    /// unit filter, since nothing can violate a rule).
    pub fn unit_context(&self) -> UnitContext {
        match &self.units {
            Some(units) => UnitContext::Explicit(units.clone()),
            None => UnitContext::Dimensionless,
        }
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Dataset::read_csv_from(file)
    }

    pub fn read_csv_from<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Invalid(format!("bad csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if names.is_empty() {
            return Err(Error::EmptyInput("csv has no header"));
        }
        let width = names.len();
        let mut units: Option<Vec<UnitVec>> = None;
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Invalid(format!("bad csv record: {e}")))?;
            if record.len() != width {
                return Err(Error::Invalid(format!(
                    "row {} has {} fields, expected {}",
                    line + 2,
                    record.len(),
                    width
                )));
            }
            let first = record.get(0).unwrap_or("");
            if line == 0 && first.starts_with("#units:") {
                let mut parsed = Vec::with_capacity(width);
                parsed.push(UnitVec::parse(first.trim_start_matches("#units:").trim())?);
                for field in record.iter().skip(1) {
                    parsed.push(UnitVec::parse(field)?);
                }
                units = Some(parsed);
                continue;
            }
            for (j, field) in record.iter().enumerate() {
                let value: f64 = field.parse().map_err(|_| {
                    Error::Invalid(format!(
                        "row {}, column '{}': cannot parse '{}' as a number",
                        line + 2,
                        names[j],
                        field
                    ))
                })?;
                if !value.is_finite() {
                    return Err(Error::NonFinite("csv value"));
                }
                columns[j].push(value);
            }
        }
        let mut data = Dataset::from_columns(names, columns)?;
        data.units = units;
        Ok(data)
    }

    /// Removes the named column and returns it as the response.
    pub fn split_response(mut self, response: &str) -> Result<(Dataset, Vec<f64>)> {
        let idx = self
            .names
            .iter()
            .position(|n| n == response)
            .ok_or_else(|| Error::Invalid(format!("response column '{response}' not found")))?;
        self.names.remove(idx);
        let y = self.columns.remove(idx);
        if let Some(units) = &mut self.units {
            units.remove(idx);
        }
        if self.columns.is_empty() {
            return Err(Error::EmptyInput("no feature columns left after removing response"));
        }
        Ok((self, y))
    }
}

/// Reads a single-column response CSV (header row then numeric rows).
pub fn read_response_csv(path: &Path) -> Result<Vec<f64>> {
    let data = Dataset::read_csv(path)?;
    if data.columns.len() != 1 {
        return Err(Error::Invalid(format!(
            "response file {} must have exactly one column, found {}",
            path.display(),
            data.columns.len()
        )));
    }
    Ok(data.columns.into_iter().next().unwrap())
}
