pub mod bart_select;
pub mod evaluate;
pub mod generate;
pub mod select;
pub mod simulate;

use anyhow::{Context, Result};
use ibart_core::data::{read_response_csv, Dataset};
use std::path::{Path, PathBuf};

/// Loads features + response. The response is either a named column of the
/// data file or a separate single-column CSV (when the argument names an
/// existing file).
pub fn load_xy(data_path: &Path, response: &str) -> Result<(Dataset, Vec<f64>)> {
    let data = Dataset::read_csv(data_path)
        .with_context(|| format!("loading data {}", data_path.display()))?;
    let response_path = PathBuf::from(response);
    if response_path.is_file() {
        let y = read_response_csv(&response_path)
            .with_context(|| format!("loading response {}", response_path.display()))?;
        if y.len() != data.n_rows {
            anyhow::bail!(ibart_core::Error::Invalid(format!(
                "response file has {} rows, data has {}",
                y.len(),
                data.n_rows
            )));
        }
        Ok((data, y))
    } else {
        let (x, y) = data.split_response(response)?;
        Ok((x, y))
    }
}
