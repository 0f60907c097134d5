use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use electorate_core::snapshot::diff;
use electorate_core::{Gender, Snapshot};
use serde::{Deserialize, Serialize};

use super::snapshot::{DiffRecord, DIFF_HEADER};
use super::{compose, gather_predictions, load_model, load_snapshot, Globals};
use crate::error::{bad_input, InputContext};
use crate::report::{compositions_table, num, table, tests_table, write_report, CompositionRecord, ZTestRecord};

#[derive(Debug, Args)]
pub struct EventStudyArgs {
    /// TOML case-study configuration.
    #[arg(long)]
    pub config: PathBuf,
}

/// A before/after event study. Relative paths resolve against the
/// configuration file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudyConfig {
    pub candidate: String,
    /// Label of the event, e.g. its date.
    pub event: String,
    pub before: SnapshotPair,
    pub after: SnapshotPair,
    /// Profile tensor files covering the users to classify.
    #[serde(default)]
    pub tensors: Vec<PathBuf>,
    /// Prediction CSVs written by `classify`, used as-is.
    #[serde(default)]
    pub predictions: Vec<PathBuf>,
    /// Classifier model for `tensors`; `--model` is used when absent.
    pub model: Option<PathBuf>,
    /// Class whose share is tested (default female).
    #[serde(default = "default_class", deserialize_with = "gender_from_str")]
    pub tested_class: Gender,
    /// Output root; `--out` takes precedence.
    pub out: Option<PathBuf>,
}

fn default_class() -> Gender {
    Gender::Female
}

fn gender_from_str<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Gender, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPair {
    pub older: PathBuf,
    pub newer: PathBuf,
}

impl CaseStudyConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).bad_input(format_args!("config {}", path.display()))?;
        let mut config: CaseStudyConfig = toml::from_str(&text).bad_input(format_args!("config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| *p = base.join(&*p);
        for p in [&mut config.before.older, &mut config.before.newer, &mut config.after.older, &mut config.after.newer] {
            resolve(p);
        }
        config.tensors.iter_mut().for_each(resolve);
        config.predictions.iter_mut().for_each(resolve);
        config.model.iter_mut().for_each(resolve);
        config.out.iter_mut().for_each(resolve);
        Ok(config)
    }
}

#[derive(Debug, Serialize)]
struct EventStudyReport {
    candidate: String,
    event: String,
    tested_class: String,
    alpha: f64,
    summary: Vec<PeriodRecord>,
    compositions: Vec<CompositionRecord>,
    tests: Vec<ZTestRecord>,
}

#[derive(Debug, Serialize)]
struct PeriodRecord {
    period: &'static str,
    #[serde(flatten)]
    diff: DiffRecord,
}

fn check_candidate(config: &CaseStudyConfig, snap: &Snapshot, path: &Path) -> anyhow::Result<()> {
    if snap.candidate().as_str() != config.candidate {
        return Err(bad_input(format!(
            "snapshot {} belongs to {:?}, config names {:?}",
            path.display(),
            snap.candidate().as_str(),
            config.candidate
        )));
    }
    Ok(())
}

pub fn run(g: &Globals, a: EventStudyArgs) -> anyhow::Result<PathBuf> {
    let config = CaseStudyConfig::load(&a.config)?;
    let params = config.model.as_deref().or(g.model.as_deref()).map(load_model).transpose()?;

    let mut snaps = Vec::with_capacity(4);
    for path in [&config.before.older, &config.before.newer, &config.after.older, &config.after.newer] {
        let snap = load_snapshot(path)?;
        check_candidate(&config, &snap, path)?;
        snaps.push(snap);
    }
    if snaps[1].captured_at() > snaps[2].captured_at() {
        return Err(bad_input("the before pair must end no later than the after pair starts"));
    }
    let before = diff(&snaps[0], &snaps[1]).bad_input("before pair")?;
    let after = diff(&snaps[2], &snaps[3]).bad_input("after pair")?;

    let predictions: HashMap<u64, Gender> = gather_predictions(g, params.as_ref(), &config.tensors, &config.predictions)?;

    let class = config.tested_class;
    let cohorts = [
        ("new followers before", &before.new_followers),
        ("new followers after", &after.new_followers),
        ("unfollowers before", &before.unfollowers),
        ("unfollowers after", &after.unfollowers),
    ];
    let comps: Vec<_> = cohorts.iter().map(|(label, ids)| compose(label, ids, &predictions)).collect();
    let tests = vec![
        ZTestRecord::run("new followers", &comps[0].0, &comps[1].0, class, g.alpha),
        ZTestRecord::run("unfollowers", &comps[2].0, &comps[3].0, class, g.alpha),
    ];
    let report = EventStudyReport {
        candidate: config.candidate.clone(),
        event: config.event.clone(),
        tested_class: class.as_str().to_owned(),
        alpha: g.alpha,
        summary: vec![
            PeriodRecord { period: "before", diff: DiffRecord::new(&snaps[0], &snaps[1], &before) },
            PeriodRecord { period: "after", diff: DiffRecord::new(&snaps[2], &snaps[3], &after) },
        ],
        compositions: comps.iter().map(|(c, missing)| CompositionRecord::new(c, *missing)).collect(),
        tests,
    };

    let mut text = format!("{}: {} (alpha {})\n\n", report.candidate, report.event, num(g.alpha));
    let rows: Vec<Vec<String>> = report.summary.iter().map(|p| p.diff.row(p.period)).collect();
    text.push_str(&table(&DIFF_HEADER, &rows));
    text.push('\n');
    text.push_str(&compositions_table(&report.compositions));
    text.push('\n');
    text.push_str(&tests_table(&report.tests));

    let dir = g.run_dir("event-study", config.out.as_deref())?;
    write_report(&dir, &report, &text)?;
    Ok(dir)
}
