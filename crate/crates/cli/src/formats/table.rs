//! Small CSV tables keyed by user ID: display names, weak labels,
//! predictions and face manifests. All have a header row.

use std::path::Path;

use electorate_core::labeler::WeakLabel;
use electorate_core::Gender;
use serde::{Deserialize, Serialize};

use super::FormatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameRow {
    pub user_id: u64,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub user_id: u64,
    pub label: String,
}

impl LabelRow {
    pub fn new(user_id: u64, label: WeakLabel) -> Self {
        LabelRow { user_id, label: label.as_str().to_owned() }
    }

    pub fn weak_label(&self) -> Result<WeakLabel, FormatError> {
        if self.label == "unknown" {
            return Ok(WeakLabel::Unknown);
        }
        self.label.parse::<Gender>().map(WeakLabel::Known).map_err(|e| FormatError::Parse {
            line: 0,
            reason: format!("user {}: {e}", self.user_id),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub user_id: u64,
    pub label: String,
    pub p_male: f64,
}

/// One detected face, or a face-less image when the box fields are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub user_id: u64,
    pub path: String,
    pub x: Option<u32>,
    pub y: Option<u32>,
    pub w: Option<u32>,
    pub h: Option<u32>,
}

fn csv_err(e: csv::Error) -> FormatError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FormatError::Io(io),
        other => FormatError::Parse { line, reason: format!("{other:?}") },
    }
}

pub fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, FormatError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), FormatError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}
