//! Command-line interface: argument definitions and subcommand dispatch.

mod audience;
mod classify;
mod event_study;
mod ingest;
mod simulate;
mod snapshot;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use electorate_core::cnn::{forward_planar, to_planar, NetworkParams};
use electorate_core::image::{FaceTensor, DEFAULT_MIN_BYTES};
use electorate_core::{Gender, Snapshot};
use rayon::prelude::*;

use crate::error::{bad_input, InputContext};
use crate::formats;

pub use event_study::CaseStudyConfig;

#[derive(Debug, Parser)]
#[command(name = "electorate", version, about = "Gender analytics over candidate follower snapshots")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Globals {
    /// Root seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for classification (0 = all logical cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output root; runs write to <out>/<subcommand>/<run-id>/.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run directory name (default: current UTC time, e.g. 20160426T000000Z).
    #[arg(long, global = true)]
    pub run_id: Option<String>,
    /// Classifier model file.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Directory with male_names.txt and female_names.txt (default: built-in list).
    #[arg(long, global = true)]
    pub lexicon_dir: Option<PathBuf>,
    /// Minimum original image size in bytes.
    #[arg(long, global = true, default_value_t = DEFAULT_MIN_BYTES)]
    pub min_bytes: u64,
    /// Significance level for hypothesis tests.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch a follower listing from fixture pages into a snapshot file.
    Ingest(ingest::IngestArgs),
    /// Snapshot file operations.
    #[command(subcommand)]
    Snapshot(snapshot::SnapshotCommand),
    /// Convert profile images and face boxes into normalized tensors.
    Preprocess(classify::PreprocessArgs),
    /// Assign weak gender labels from display names.
    Label(classify::LabelArgs),
    /// Train the gender classifier.
    Train(classify::TrainArgs),
    /// Score a model on labeled tensors.
    Evaluate(classify::EvaluateArgs),
    /// Predict the gender of each tensor.
    Classify(classify::ClassifyArgs),
    /// Generate a synthetic labeled tensor set.
    SynthFaces(classify::SynthArgs),
    /// Before/after event study of new followers and unfollowers.
    EventStudy(event_study::EventStudyArgs),
    /// Four-group cross-following partition of one candidate's followers.
    Crossfollow(audience::CrossfollowArgs),
    /// Share of a diff cohort found in other candidates' snapshots.
    Destinations(audience::DestinationsArgs),
    /// Monte-Carlo calibration of the z-test under the affinity model.
    Simulate(simulate::SimulateArgs),
}

impl Globals {
    pub fn run_dir(&self, subcommand: &str, fallback_out: Option<&Path>) -> anyhow::Result<PathBuf> {
        let out = self.out.clone().or_else(|| fallback_out.map(Path::to_path_buf)).unwrap_or_else(|| "out".into());
        let run_id = self.run_id.clone().unwrap_or_else(|| chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string());
        crate::report::run_dir(&out, subcommand, &run_id)
            .with_context(|| format!("creating output directory under {}", out.display()))
    }

    pub fn check(&self) -> anyhow::Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad_input(format!("--alpha must be in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn require_model(&self) -> anyhow::Result<NetworkParams> {
        let path = self.model.as_ref().ok_or_else(|| bad_input("--model is required"))?;
        load_model(path)
    }

    fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build()?)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<PathBuf> {
    let g = &cli.globals;
    g.check()?;
    match cli.command {
        Command::Ingest(a) => ingest::run(g, a),
        Command::Snapshot(c) => snapshot::run(g, c),
        Command::Preprocess(a) => classify::preprocess(g, a),
        Command::Label(a) => classify::label(g, a),
        Command::Train(a) => classify::train(g, a),
        Command::Evaluate(a) => classify::evaluate(g, a),
        Command::Classify(a) => classify::classify(g, a),
        Command::SynthFaces(a) => classify::synth(g, a),
        Command::EventStudy(a) => event_study::run(g, a),
        Command::Crossfollow(a) => audience::crossfollow(g, a),
        Command::Destinations(a) => audience::destinations(g, a),
        Command::Simulate(a) => simulate::run(g, a),
    }
}

pub(crate) fn load_snapshot(path: &Path) -> anyhow::Result<Snapshot> {
    formats::snapshot::load(path).bad_input(format_args!("snapshot {}", path.display()))
}

pub(crate) fn load_model(path: &Path) -> anyhow::Result<NetworkParams> {
    formats::model::load(path).bad_input(format_args!("model {}", path.display()))
}

pub(crate) fn load_tensors(path: &Path) -> anyhow::Result<Vec<FaceTensor>> {
    formats::tensor::load(path).bad_input(format_args!("tensors {}", path.display()))
}

/// Per-user predicted class and `P(male)`, computed on the worker pool.
/// Output order matches `tensors`.
pub(crate) fn predict_all(
    g: &Globals,
    params: &NetworkParams,
    tensors: &[FaceTensor],
) -> anyhow::Result<Vec<(u64, Gender, f64)>> {
    let pool = g.pool()?;
    Ok(pool.install(|| {
        tensors
            .par_iter()
            .map(|t| {
                let p = forward_planar(params, &[to_planar(t)])[0];
                let class = if p[1] > p[0] { Gender::Female } else { Gender::Male };
                (t.user_id, class, p[0])
            })
            .collect()
    }))
}

/// Classified gender of each user with a tensor.
pub(crate) fn classify_users(
    g: &Globals,
    params: &NetworkParams,
    tensors: &[FaceTensor],
) -> anyhow::Result<HashMap<u64, Gender>> {
    Ok(predict_all(g, params, tensors)?.into_iter().map(|(id, class, _)| (id, class)).collect())
}

/// Predicted gender per user, from tensors classified with the model and
/// from previously written prediction CSVs. A model is required only when
/// tensors are given.
pub(crate) fn gather_predictions(
    g: &Globals,
    params: Option<&NetworkParams>,
    tensors: &[PathBuf],
    predictions: &[PathBuf],
) -> anyhow::Result<HashMap<u64, Gender>> {
    let mut out = HashMap::new();
    for path in predictions {
        let rows: Vec<formats::table::PredictionRow> =
            formats::table::read(path).bad_input(format_args!("predictions {}", path.display()))?;
        for row in rows {
            let class: Gender = row.label.parse().bad_input(format_args!("predictions {}", path.display()))?;
            out.insert(row.user_id, class);
        }
    }
    if !tensors.is_empty() {
        let params = params.ok_or_else(|| bad_input("classifying tensors requires a model"))?;
        let mut all = Vec::new();
        for path in tensors {
            all.extend(load_tensors(path)?);
        }
        out.extend(classify_users(g, params, &all)?);
    }
    Ok(out)
}

/// Gender composition of a cohort plus the count of members without a
/// prediction.
pub(crate) fn compose(
    label: &str,
    cohort: &[u64],
    predictions: &HashMap<u64, Gender>,
) -> (electorate_core::ztest::GenderComposition, u64) {
    let (mut male, mut female, mut missing) = (0, 0, 0);
    for id in cohort {
        match predictions.get(id) {
            Some(Gender::Male) => male += 1,
            Some(Gender::Female) => female += 1,
            None => missing += 1,
        }
    }
    (electorate_core::ztest::GenderComposition::new(label, male, female), missing)
}

/// Accepts epoch seconds, RFC 3339, or a bare `YYYY-MM-DD` date (UTC midnight).
pub(crate) fn parse_timestamp(s: &str) -> Result<i64, String> {
    if let Ok(secs) = s.parse::<i64>() {
        return Ok(secs);
    }
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(s) {
        return Ok(t.timestamp());
    }
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc().timestamp())
        .map_err(|_| format!("invalid timestamp {s:?}: expected epoch seconds, RFC 3339 or YYYY-MM-DD"))
}

pub(crate) fn format_timestamp(secs: i64) -> String {
    chrono::DateTime::from_timestamp(secs, 0)
        .map_or_else(|| secs.to_string(), |t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1461628800").unwrap(), 1_461_628_800);
        assert_eq!(parse_timestamp("2016-04-26").unwrap(), 1_461_628_800);
        assert_eq!(parse_timestamp("2016-04-26T00:00:00Z").unwrap(), 1_461_628_800);
        assert!(parse_timestamp("April 26").is_err());
        assert_eq!(format_timestamp(1_461_628_800), "2016-04-26T00:00:00Z");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
