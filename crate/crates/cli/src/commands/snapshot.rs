use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use electorate_core::snapshot::diff;
use electorate_core::{Candidate, Snapshot, Timestamp};
use serde::Serialize;

use super::{format_timestamp, load_snapshot, parse_timestamp, Globals};
use crate::error::{bad_input, InputContext};
use crate::formats;
use crate::report::{table, write_report};

#[derive(Debug, Subcommand)]
pub enum SnapshotCommand {
    /// New followers, unfollowers and net gain between two snapshots.
    Diff(DiffArgs),
    /// Write a snapshot as CSV.
    Export(ExportArgs),
    /// Build a snapshot file from a newline-delimited ID list.
    Import(ImportArgs),
    /// Follower counts and gains over a series of snapshots.
    Growth(GrowthArgs),
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[arg(long)]
    pub older: PathBuf,
    #[arg(long)]
    pub newer: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// ID list, one decimal ID per line; order and duplicates are ignored.
    #[arg(long)]
    pub ids: PathBuf,
    #[arg(long)]
    pub candidate: String,
    #[arg(long, value_parser = parse_timestamp)]
    pub captured_at: i64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    /// Snapshots of one candidate in capture order.
    #[arg(long = "snapshot", required = true, num_args = 1..)]
    pub snapshots: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
pub(crate) struct DiffRecord {
    pub candidate: String,
    pub older_at: i64,
    pub newer_at: i64,
    pub older_count: usize,
    pub newer_count: usize,
    pub new_followers: usize,
    pub unfollowers: usize,
    pub net_gain: i64,
}

impl DiffRecord {
    pub fn new(older: &Snapshot, newer: &Snapshot, d: &electorate_core::DiffResult) -> Self {
        DiffRecord {
            candidate: older.candidate().as_str().to_owned(),
            older_at: older.captured_at().seconds(),
            newer_at: newer.captured_at().seconds(),
            older_count: older.len(),
            newer_count: newer.len(),
            new_followers: d.new_followers.len(),
            unfollowers: d.unfollowers.len(),
            net_gain: d.net_gain,
        }
    }

    pub fn row(&self, label: &str) -> Vec<String> {
        vec![
            label.to_owned(),
            format_timestamp(self.older_at),
            format_timestamp(self.newer_at),
            self.new_followers.to_string(),
            self.unfollowers.to_string(),
            self.net_gain.to_string(),
        ]
    }
}

pub(crate) const DIFF_HEADER: [&str; 6] = ["Period", "from", "to", "new followers", "unfollowers", "net gain"];

fn write_id_file(path: &std::path::Path, ids: &[u64]) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    formats::ids::write_ids(&mut out, ids)?;
    out.flush()?;
    Ok(())
}

pub fn run(g: &Globals, cmd: SnapshotCommand) -> anyhow::Result<PathBuf> {
    match cmd {
        SnapshotCommand::Diff(a) => {
            let older = load_snapshot(&a.older)?;
            let newer = load_snapshot(&a.newer)?;
            let d = diff(&older, &newer).bad_input("diff")?;
            let record = DiffRecord::new(&older, &newer, &d);
            let dir = g.run_dir("snapshot-diff", None)?;
            write_id_file(&dir.join("new_followers.txt"), &d.new_followers)?;
            write_id_file(&dir.join("unfollowers.txt"), &d.unfollowers)?;
            let text = table(&DIFF_HEADER, &[record.row(&record.candidate)]);
            write_report(&dir, &record, &text)?;
            Ok(dir)
        }
        SnapshotCommand::Export(a) => {
            let snapshot = load_snapshot(&a.input)?;
            formats::snapshot::export_csv(&snapshot, &a.output)?;
            Ok(a.output)
        }
        SnapshotCommand::Import(a) => {
            let file = File::open(&a.ids).bad_input(format_args!("ids {}", a.ids.display()))?;
            let ids = formats::ids::read_ids(BufReader::new(file)).bad_input(format_args!("ids {}", a.ids.display()))?;
            let snapshot = Snapshot::from_unsorted(Candidate::new(a.candidate), Timestamp(a.captured_at), ids);
            formats::snapshot::save(&snapshot, &a.output)?;
            Ok(a.output)
        }
        SnapshotCommand::Growth(a) => growth(g, a),
    }
}

#[derive(Debug, Serialize)]
struct GrowthPoint {
    captured_at: i64,
    followers: usize,
    new_followers: Option<usize>,
    unfollowers: Option<usize>,
    net_gain: Option<i64>,
}

#[derive(Debug, Serialize)]
struct GrowthReport {
    candidate: String,
    points: Vec<GrowthPoint>,
}

fn growth(g: &Globals, a: GrowthArgs) -> anyhow::Result<PathBuf> {
    let mut points = Vec::with_capacity(a.snapshots.len());
    let mut prev: Option<Snapshot> = None;
    let mut candidate = String::new();
    for path in &a.snapshots {
        let snap = load_snapshot(path)?;
        let mut point = GrowthPoint {
            captured_at: snap.captured_at().seconds(),
            followers: snap.len(),
            new_followers: None,
            unfollowers: None,
            net_gain: None,
        };
        match &prev {
            Some(p) => {
                let d = diff(p, &snap).bad_input(format_args!("snapshot {}", path.display()))?;
                point.new_followers = Some(d.new_followers.len());
                point.unfollowers = Some(d.unfollowers.len());
                point.net_gain = Some(d.net_gain);
            }
            None => candidate = snap.candidate().as_str().to_owned(),
        }
        points.push(point);
        prev = Some(snap);
    }
    if points.is_empty() {
        return Err(bad_input("at least one --snapshot is required"));
    }
    let dir = g.run_dir("snapshot-growth", None)?;
    let mut csv = csv::Writer::from_path(dir.join("growth.csv"))?;
    for p in &points {
        csv.serialize(p)?;
    }
    csv.flush()?;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                format_timestamp(p.captured_at),
                p.followers.to_string(),
                opt(p.new_followers.map(|v| v.to_string())),
                opt(p.unfollowers.map(|v| v.to_string())),
                opt(p.net_gain.map(|v| v.to_string())),
            ]
        })
        .collect();
    let text = table(&["Captured at", "followers", "new followers", "unfollowers", "net gain"], &rows);
    write_report(&dir, &GrowthReport { candidate, points }, &text)?;
    Ok(dir)
}
