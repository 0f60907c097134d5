//! Report records and the per-run output directory.
//!
//! Every run writes to `<out>/<subcommand>/<run-id>/` a `report.json`, a
//! human-readable `report.txt` and any CSV series. Report JSON never
//! contains wall-clock time, so reruns with the same inputs and seed are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use electorate_core::ztest::{two_sample_z, GenderComposition, ZTestError};
use electorate_core::Gender;
use serde::Serialize;

pub fn run_dir(out: &Path, subcommand: &str, run_id: &str) -> std::io::Result<PathBuf> {
    let dir = out.join(subcommand).join(run_id);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_report<T: Serialize>(dir: &Path, report: &T, text: &str) -> anyhow::Result<()> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    fs::write(dir.join("report.txt"), text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRecord {
    pub label: String,
    pub male_count: u64,
    pub female_count: u64,
    /// Cohort members without a classifiable profile image.
    pub unclassified: u64,
    pub male_share: Option<f64>,
}

impl CompositionRecord {
    pub fn new(c: &GenderComposition, unclassified: u64) -> Self {
        CompositionRecord {
            label: c.label.clone(),
            male_count: c.male_count,
            female_count: c.female_count,
            unclassified,
            male_share: c.share(Gender::Male),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestStatus {
    Ok,
    Degenerate,
    Empty,
}

/// A two-sample z-test outcome. Statistic fields are `null` unless the
/// status is `ok`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZTestRecord {
    pub cohort: String,
    pub before_label: String,
    pub after_label: String,
    pub tested_class: String,
    pub status: TestStatus,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub pooled_p: Option<f64>,
    pub n1: u64,
    pub n2: u64,
    pub rejects: Option<bool>,
}

impl ZTestRecord {
    pub fn run(
        cohort: &str,
        before: &GenderComposition,
        after: &GenderComposition,
        class: Gender,
        alpha: f64,
    ) -> Self {
        let mut rec = ZTestRecord {
            cohort: cohort.to_owned(),
            before_label: before.label.clone(),
            after_label: after.label.clone(),
            tested_class: class.as_str().to_owned(),
            status: TestStatus::Ok,
            z: None,
            p_value: None,
            p1: before.share(class),
            p2: after.share(class),
            pooled_p: None,
            n1: before.total(),
            n2: after.total(),
            rejects: None,
        };
        match two_sample_z(before, after, class) {
            Ok(r) => {
                rec.z = Some(r.z);
                rec.p_value = Some(r.p_value);
                rec.pooled_p = Some(r.pooled_p);
                rec.rejects = Some(r.rejects(alpha));
            }
            Err(ZTestError::Degenerate { pooled_p }) => {
                rec.status = TestStatus::Degenerate;
                rec.pooled_p = Some(pooled_p);
            }
            Err(_) => rec.status = TestStatus::Empty,
        }
        rec
    }
}

/// Formats a real for text tables: fixed four decimals, or scientific
/// notation for small non-zero magnitudes.
pub fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        format!("{x:.4}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_owned(), num)
}

/// Left-aligned first column, right-aligned others.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate().take(cols) {
            if i == 0 {
                write!(out, "{cell:<w$}", w = widths[0]).unwrap();
            } else {
                write!(out, "  {cell:>w$}", w = widths[i]).unwrap();
            }
        }
        out.push('\n');
    };
    line(&mut out, &header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &rule);
    for row in rows {
        line(&mut out, row);
    }
    out
}

pub fn tests_table(tests: &[ZTestRecord]) -> String {
    let rows: Vec<Vec<String>> = tests
        .iter()
        .map(|t| {
            vec![
                t.cohort.clone(),
                t.tested_class.clone(),
                opt_num(t.p1),
                opt_num(t.p2),
                t.n1.to_string(),
                t.n2.to_string(),
                match t.status {
                    TestStatus::Ok => opt_num(t.z),
                    TestStatus::Degenerate => "degenerate".into(),
                    TestStatus::Empty => "empty".into(),
                },
                opt_num(t.p_value),
            ]
        })
        .collect();
    table(&["Null hypothesis p_before = p_after", "class", "p1", "p2", "n1", "n2", "z statistic", "p value"], &rows)
}

pub fn compositions_table(comps: &[CompositionRecord]) -> String {
    let rows: Vec<Vec<String>> = comps
        .iter()
        .map(|c| {
            vec![
                c.label.clone(),
                c.male_count.to_string(),
                c.female_count.to_string(),
                c.unclassified.to_string(),
                opt_num(c.male_share),
            ]
        })
        .collect();
    table(&["Cohort", "male", "female", "unclassified", "male share"], &rows)
}
