use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use voronoi_bubbles::partitions::PartitionSpec;
use voronoi_bubbles::potential::PotentialSpec;

use crate::failure::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::schema(path, &e))
}

pub fn read_partition(path: &Path) -> Result<PartitionSpec, CliError> {
    let part: PartitionSpec = read_json(path)?;
    part.validate().map_err(|e| CliError::from(e).with_path(path))?;
    Ok(part)
}

/// A potential file holds either a bare potential or a `potential` report.
pub fn read_potential(path: &Path) -> Result<PotentialSpec, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let inner = value.get("potential").cloned().unwrap_or(value);
    let v: PotentialSpec = serde_json::from_value(inner).map_err(|e| CliError::schema(path, &e))?;
    v.validate().map_err(|e| CliError::from(e).with_path(path))?;
    Ok(v)
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// definitions, so equal inputs give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
