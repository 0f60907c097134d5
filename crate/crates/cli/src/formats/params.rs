//! Flat `key = value` text files for affinity-model parameters.
//!
//! ```text
//! # woman-card scenario
//! baseline_m = 0
//! baseline_w = 0
//! lambda_m = 0
//! lambda_w = 0.1
//! n_prime_m = 50000
//! n_prime_w = 50000
//! n_dprime_m = 50000
//! n_dprime_w = 50000
//! ```
//!
//! All eight keys are required; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write;

use electorate_core::affinity::AffinityParams;

use super::FormatError;

const KEYS: [&str; 8] =
    ["baseline_m", "baseline_w", "lambda_m", "lambda_w", "n_prime_m", "n_prime_w", "n_dprime_m", "n_dprime_w"];

pub fn parse(text: &str) -> Result<AffinityParams, FormatError> {
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| FormatError::Parse { line: i + 1, reason };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key {key:?}")));
        }
        if values.insert(key, (i + 1, value.trim().to_owned())).is_some() {
            return Err(err(format!("duplicate key {key:?}")));
        }
    }
    let real = |key: &str| -> Result<f64, FormatError> {
        let (line, v) = values.get(key).ok_or(FormatError::Parse { line: 0, reason: format!("missing key {key:?}") })?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| FormatError::Parse { line: *line, reason: format!("{key} must be a finite number") })
    };
    let count = |key: &str| -> Result<u64, FormatError> {
        let (line, v) = values.get(key).ok_or(FormatError::Parse { line: 0, reason: format!("missing key {key:?}") })?;
        v.parse::<u64>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| FormatError::Parse { line: *line, reason: format!("{key} must be a positive integer") })
    };
    Ok(AffinityParams {
        baseline_m: real("baseline_m")?,
        baseline_w: real("baseline_w")?,
        lambda_m: real("lambda_m")?,
        lambda_w: real("lambda_w")?,
        n_prime_m: count("n_prime_m")?,
        n_prime_w: count("n_prime_w")?,
        n_dprime_m: count("n_dprime_m")?,
        n_dprime_w: count("n_dprime_w")?,
    })
}

pub fn render(p: &AffinityParams) -> String {
    let mut out = String::new();
    let reals = [("baseline_m", p.baseline_m), ("baseline_w", p.baseline_w), ("lambda_m", p.lambda_m), ("lambda_w", p.lambda_w)];
    for (k, v) in reals {
        writeln!(out, "{k} = {v:?}").unwrap();
    }
    let counts = [
        ("n_prime_m", p.n_prime_m),
        ("n_prime_w", p.n_prime_w),
        ("n_dprime_m", p.n_dprime_m),
        ("n_dprime_w", p.n_dprime_w),
    ];
    for (k, v) in counts {
        writeln!(out, "{k} = {v}").unwrap();
    }
    out
}
