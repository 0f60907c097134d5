use std::path::PathBuf;

use clap::{Args, ValueEnum};
use electorate_core::audience::{destination_rates, intersection_count, partition_groups};
use electorate_core::snapshot::diff;
use electorate_core::Gender;
use serde::Serialize;

use super::{compose, gather_predictions, load_model, load_snapshot, Globals};
use crate::error::InputContext;
use crate::report::{compositions_table, num, table, tests_table, write_report, CompositionRecord, ZTestRecord};

#[derive(Debug, Args)]
pub struct CrossfollowArgs {
    /// Snapshot of the candidate whose followers are partitioned.
    #[arg(long)]
    pub focal: PathBuf,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Profile tensors of focal followers, classified with `--model`.
    #[arg(long = "tensors")]
    pub tensors: Vec<PathBuf>,
    /// Prediction CSVs (user_id,label,p_male) written by `classify`.
    #[arg(long = "predictions")]
    pub predictions: Vec<PathBuf>,
    /// Class whose share is compared between the a-only group and the other
    /// focal followers.
    #[arg(long, default_value = "male")]
    pub tested_class: Gender,
}

#[derive(Debug, Serialize)]
struct GroupRecord {
    group: &'static str,
    count: usize,
    share: f64,
}

#[derive(Debug, Serialize)]
struct CrossfollowReport {
    focal: String,
    a: String,
    b: String,
    total: usize,
    groups: Vec<GroupRecord>,
    compositions: Vec<CompositionRecord>,
    tests: Vec<ZTestRecord>,
}

const GROUP_NAMES: [&str; 4] = ["a_only", "b_only", "both", "focal_only"];

pub fn crossfollow(g: &Globals, args: CrossfollowArgs) -> anyhow::Result<PathBuf> {
    let focal = load_snapshot(&args.focal)?;
    let a = load_snapshot(&args.a)?;
    let b = load_snapshot(&args.b)?;
    let parts = partition_groups(&focal, &a, &b);
    let groups: Vec<GroupRecord> = GROUP_NAMES
        .iter()
        .zip(parts.counts().iter().zip(parts.shares()))
        .map(|(&group, (&count, share))| GroupRecord { group, count, share })
        .collect();

    let (mut compositions, mut tests) = (Vec::new(), Vec::new());
    if !args.tensors.is_empty() || !args.predictions.is_empty() {
        let params = g.model.as_deref().map(load_model).transpose()?;
        let predictions = gather_predictions(g, params.as_ref(), &args.tensors, &args.predictions)?;
        // The a-only group is compared with the disjoint remainder of the
        // focal followers so the two samples are independent.
        let rest: Vec<u64> =
            [&parts.group_b_only, &parts.group_both, &parts.group_focal_only].into_iter().flatten().copied().collect();
        let cohorts = [
            ("all", focal.ids()),
            ("rest", &rest[..]),
            ("a_only", &parts.group_a_only[..]),
            ("b_only", &parts.group_b_only[..]),
            ("both", &parts.group_both[..]),
            ("focal_only", &parts.group_focal_only[..]),
        ];
        let comps: Vec<_> = cohorts.iter().map(|(label, ids)| compose(label, ids, &predictions)).collect();
        tests.push(ZTestRecord::run("rest vs a_only", &comps[1].0, &comps[2].0, args.tested_class, g.alpha));
        compositions = comps.iter().map(|(c, missing)| CompositionRecord::new(c, *missing)).collect();
    }

    let report = CrossfollowReport {
        focal: focal.candidate().as_str().to_owned(),
        a: a.candidate().as_str().to_owned(),
        b: b.candidate().as_str().to_owned(),
        total: parts.total(),
        groups,
        compositions,
        tests,
    };
    let rows: Vec<Vec<String>> =
        report.groups.iter().map(|r| vec![r.group.to_owned(), r.count.to_string(), num(r.share)]).collect();
    let mut text = format!(
        "Followers of {} ({}), split by also following {} (a) and {} (b)\n\n",
        report.focal, report.total, report.a, report.b
    );
    text.push_str(&table(&["Group", "count", "share"], &rows));
    if !report.compositions.is_empty() {
        text.push('\n');
        text.push_str(&compositions_table(&report.compositions));
        text.push('\n');
        text.push_str(&tests_table(&report.tests));
    }
    let dir = g.run_dir("crossfollow", None)?;
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cohort {
    NewFollowers,
    Unfollowers,
}

#[derive(Debug, Args)]
pub struct DestinationsArgs {
    #[arg(long)]
    pub older: PathBuf,
    #[arg(long)]
    pub newer: PathBuf,
    /// Snapshots of the candidates checked as destinations.
    #[arg(long = "dest", required = true, num_args = 1..)]
    pub destinations: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "unfollowers")]
    pub cohort: Cohort,
}

#[derive(Debug, Serialize)]
struct RateRecord {
    candidate: String,
    count: usize,
    rate: f64,
}

#[derive(Debug, Serialize)]
struct DestinationsReport {
    candidate: String,
    cohort: Cohort,
    cohort_size: usize,
    destinations: Vec<RateRecord>,
}

pub fn destinations(g: &Globals, args: DestinationsArgs) -> anyhow::Result<PathBuf> {
    let older = load_snapshot(&args.older)?;
    let newer = load_snapshot(&args.newer)?;
    let d = diff(&older, &newer).bad_input("diff")?;
    let cohort = match args.cohort {
        Cohort::NewFollowers => &d.new_followers,
        Cohort::Unfollowers => &d.unfollowers,
    };
    let mut dests = Vec::with_capacity(args.destinations.len());
    for path in &args.destinations {
        dests.push(load_snapshot(path)?);
    }
    let rates = destination_rates(cohort, dests.iter().map(|s| (s.candidate().as_str(), s)));
    let destinations: Vec<RateRecord> = rates
        .rates
        .iter()
        .zip(&dests)
        .map(|((name, rate), snap)| RateRecord {
            candidate: name.clone(),
            count: intersection_count(cohort, snap.ids()),
            rate: *rate,
        })
        .collect();
    let report = DestinationsReport {
        candidate: older.candidate().as_str().to_owned(),
        cohort: args.cohort,
        cohort_size: rates.cohort_size,
        destinations,
    };
    let rows: Vec<Vec<String>> = report
        .destinations
        .iter()
        .map(|r| vec![r.candidate.clone(), r.count.to_string(), format!("{:.2}%", 100.0 * r.rate)])
        .collect();
    let what = match args.cohort {
        Cohort::NewFollowers => "new followers",
        Cohort::Unfollowers => "unfollowers",
    };
    let mut text = format!("{} {} of {}\n\n", report.cohort_size, what, report.candidate);
    text.push_str(&table(&["Also follows", "count", "rate"], &rows));
    let dir = g.run_dir("destinations", None)?;
    write_report(&dir, &report, &text)?;
    Ok(dir)
}
