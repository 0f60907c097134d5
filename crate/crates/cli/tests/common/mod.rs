#![allow(dead_code)]

use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::Command;

use electorate::formats;
use electorate::formats::table::PredictionRow;
use electorate_core::cnn::{Architecture, NetworkParams};
use electorate_core::image::{FaceTensor, CHANNELS, FACE_SIZE};
use electorate_core::{Candidate, Gender, Snapshot, Timestamp};
use serde_json::Value;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    /// The run directory printed on success.
    pub fn dir(&self) -> PathBuf {
        assert_eq!(self.code, 0, "command failed: {}", self.stderr);
        PathBuf::from(self.stdout.trim())
    }
}

pub fn electorate<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_electorate"))
        .args(args)
        .env_remove("ELECTORATE_FIXTURE_DIR")
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

pub fn report_text(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("report.txt")).unwrap()
}

/// Checks a report against the shipped schema for its subcommand.
pub fn validate(subcommand: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{subcommand}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{subcommand} report violates schema: {errors:#?}");
}

pub fn write_snapshot(path: &Path, label: &str, at: i64, ids: Vec<u64>) {
    let snap = Snapshot::from_unsorted(Candidate::new(label), Timestamp(at), ids);
    formats::snapshot::save(&snap, path).unwrap();
}

pub fn write_predictions(path: &Path, labels: &[(u64, Gender)]) {
    let rows: Vec<PredictionRow> = labels
        .iter()
        .map(|&(user_id, g)| PredictionRow {
            user_id,
            label: g.as_str().to_owned(),
            p_male: if g == Gender::Male { 1.0 } else { 0.0 },
        })
        .collect();
    formats::table::write(path, &rows).unwrap();
}

/// A fixed one-channel network that calls a face male when its top rows
/// are brighter than its bottom rows, female otherwise.
pub fn hand_model() -> NetworkParams {
    let arch = Architecture::new(1, 1);
    let [s0, s1, s2, s3, s4, s5] = arch.shapes();
    let mut conv1 = vec![0.0; s0];
    conv1[12] = 1.0;
    let mut conv2 = vec![0.0; s2];
    conv2[12] = 1.0;
    let mut fc = vec![0.0; s4];
    let features = s4 / 2;
    for i in 0..features {
        let row = i / 7;
        let w = match row {
            0..=2 => 0.2,
            4..=6 => -0.2,
            _ => 0.0,
        };
        fc[i] = w;
        fc[features + i] = -w;
    }
    NetworkParams::from_blocks(arch, [conv1, vec![0.0; s1], conv2, vec![0.0; s3], fc, vec![0.0; s5]]).unwrap()
}

/// A tensor the hand model classifies as `gender`.
pub fn face(user_id: u64, gender: Gender) -> FaceTensor {
    let mut data = Vec::with_capacity(FACE_SIZE * FACE_SIZE * CHANNELS);
    for row in 0..FACE_SIZE {
        let bright = (row < FACE_SIZE / 2) == (gender == Gender::Male);
        let v = if bright { 0.9 } else { 0.1 };
        data.extend(std::iter::repeat_n(v, FACE_SIZE * CHANNELS));
    }
    FaceTensor::new(user_id, data).unwrap()
}

pub fn path_arg(p: &Path) -> String {
    p.display().to_string()
}
