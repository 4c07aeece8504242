//! Instance and solution JSON files.

use super::{Instance, SolutionRecord};
use crate::error::{FleetError, Result};
use std::path::Path;

/// Loads and fully validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
    let mut instance: Instance = serde_json::from_str(&text)
        .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
    instance.normalize();
    instance.validate()?;
    Ok(instance)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = instance_to_json(instance);
    std::fs::write(path, text).map_err(|e| FleetError::io(path.display().to_string(), e))
}

/// Canonical serialization: collections are already sorted by `normalize`, so
/// output bytes are a pure function of the instance.
pub fn instance_to_json(instance: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(instance).expect("instance serializes");
    text.push('\n');
    text
}

pub fn load_solution_record(path: impl AsRef<Path>) -> Result<SolutionRecord> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| FleetError::parse(path.display().to_string(), e))
}

pub fn save_solution_record(record: &SolutionRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(record).expect("solution serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| FleetError::io(path.display().to_string(), e))
}
