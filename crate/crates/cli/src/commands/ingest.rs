use std::path::PathBuf;

use clap::Args;
use electorate_core::ingest::{fetch_all_ids, PagedSource, VirtualClock};
use electorate_core::{Candidate, Snapshot, Timestamp};
use serde::Serialize;

use super::{format_timestamp, parse_timestamp, Globals};
use crate::error::{bad_input, InputContext};
use crate::fixture::{FixtureSource, FIXTURE_DIR_ENV};
use crate::formats;
use crate::report::{table, write_report};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Fixture root holding `<source-id>.page<k>.txt` files.
    #[arg(long, env = FIXTURE_DIR_ENV)]
    pub fixture_dir: Option<PathBuf>,
    #[arg(long)]
    pub source_id: String,
    /// Candidate label stored in the snapshot (default: the source id).
    #[arg(long)]
    pub candidate: Option<String>,
    /// Capture time: epoch seconds, RFC 3339 or YYYY-MM-DD.
    #[arg(long, value_parser = parse_timestamp)]
    pub captured_at: i64,
    #[arg(long, default_value_t = 5000)]
    pub page_size: usize,
    /// Maximum requests per rolling minute; 0 means unlimited.
    #[arg(long, default_value_t = 0)]
    pub rate_limit: u32,
    /// Snapshot file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    source_id: String,
    candidate: String,
    captured_at: i64,
    requests: u64,
    retries: u64,
    pages: usize,
    /// Virtual seconds spent waiting on the rate limit and retries.
    virtual_seconds: f64,
    ids_fetched: u64,
    unique_ids: usize,
    output: String,
}

pub fn run(g: &Globals, a: IngestArgs) -> anyhow::Result<PathBuf> {
    let root = a
        .fixture_dir
        .ok_or_else(|| bad_input(format!("--fixture-dir or {FIXTURE_DIR_ENV} is required")))?;
    if a.page_size == 0 {
        return Err(bad_input("--page-size must be positive"));
    }
    let source = PagedSource { source_id: a.source_id.clone(), page_size: a.page_size, rate_limit: a.rate_limit };
    let mut backend = FixtureSource::new(&root, &a.source_id);
    let mut clock = VirtualClock::new();
    let outcome = fetch_all_ids(&source, &mut backend, &mut clock).bad_input("fetch")?;

    let candidate = a.candidate.unwrap_or_else(|| a.source_id.clone());
    let fetched = outcome.ids.len() as u64;
    let snapshot = Snapshot::from_unsorted(Candidate::new(candidate.clone()), Timestamp(a.captured_at), outcome.ids);
    formats::snapshot::save(&snapshot, &a.output)?;

    let report = IngestReport {
        source_id: a.source_id,
        candidate,
        captured_at: a.captured_at,
        requests: outcome.stats.requests,
        retries: outcome.stats.retries,
        pages: outcome.stats.pages,
        virtual_seconds: outcome.request_times.last().copied().unwrap_or(0.0),
        ids_fetched: fetched,
        unique_ids: snapshot.len(),
        output: a.output.display().to_string(),
    };
    let text = table(
        &["Source", "candidate", "captured at", "pages", "requests", "retries", "fetched", "unique"],
        &[vec![
            report.source_id.clone(),
            report.candidate.clone(),
            format_timestamp(report.captured_at),
            report.pages.to_string(),
            report.requests.to_string(),
            report.retries.to_string(),
            report.ids_fetched.to_string(),
            report.unique_ids.to_string(),
        ]],
    );
    let dir = g.run_dir("ingest", None)?;
    write_report(&dir, &report, &text)?;
    Ok(dir)
}
