use std::path::PathBuf;

use clap::Args;
use electorate_core::affinity::{disturbance, gender_ratio, simulate, AffinityParams};
use electorate_core::rng::derive_seed;
use electorate_core::ztest::GenderComposition;
use electorate_core::Gender;
use rayon::prelude::*;
use serde::Serialize;

use super::Globals;
use crate::error::{bad_input, InputContext};
use crate::formats;
use crate::report::{num, opt_num, table, write_report, ZTestRecord};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Affinity parameter file (`key = value` lines).
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Class whose new-follower share is tested.
    #[arg(long = "class", default_value = "female")]
    pub class: Gender,
}

#[derive(Debug, Serialize)]
struct TrialRow {
    trial: u64,
    before_m: u64,
    before_w: u64,
    after_m: u64,
    after_w: u64,
    z: Option<f64>,
    p_value: Option<f64>,
    rejects: bool,
}

#[derive(Debug, Serialize)]
struct ParamsRecord {
    baseline_m: f64,
    baseline_w: f64,
    lambda_m: f64,
    lambda_w: f64,
    n_prime_m: u64,
    n_prime_w: u64,
    n_dprime_m: u64,
    n_dprime_w: u64,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    params: ParamsRecord,
    seed: u64,
    trials: u64,
    tested_class: String,
    alpha: f64,
    rejections: u64,
    degenerate: u64,
    rejection_rate: f64,
    ratio_before: Option<f64>,
    ratio_after: Option<f64>,
    disturbance: Option<f64>,
}

/// One trial: a pre-event and a post-event period of follow decisions,
/// then a z-test of the tested class's share of new followers.
fn trial(params: &AffinityParams, seed: u64, t: u64, class: Gender, alpha: f64) -> anyhow::Result<TrialRow> {
    let s = derive_seed(seed, &[t]);
    let before = simulate(params, false, s)?;
    let after = simulate(params, true, s)?;
    let test = ZTestRecord::run(
        "new followers",
        &GenderComposition::new("before", before.followed_m, before.followed_w),
        &GenderComposition::new("after", after.followed_m, after.followed_w),
        class,
        alpha,
    );
    Ok(TrialRow {
        trial: t,
        before_m: before.followed_m,
        before_w: before.followed_w,
        after_m: after.followed_m,
        after_w: after.followed_w,
        z: test.z,
        p_value: test.p_value,
        rejects: test.rejects == Some(true),
    })
}

pub fn run(g: &Globals, a: SimulateArgs) -> anyhow::Result<PathBuf> {
    let text = std::fs::read_to_string(&a.params).bad_input(format_args!("params {}", a.params.display()))?;
    let params = formats::params::parse(&text).bad_input(format_args!("params {}", a.params.display()))?;
    params.validate().bad_input("params")?;
    if a.trials == 0 {
        return Err(bad_input("--trials must be positive"));
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build()?;
    let rows: Vec<TrialRow> = pool.install(|| {
        (0..a.trials).into_par_iter().map(|t| trial(&params, g.seed, t, a.class, g.alpha)).collect::<anyhow::Result<_>>()
    })?;

    let rejections = rows.iter().filter(|r| r.rejects).count() as u64;
    let degenerate = rows.iter().filter(|r| r.z.is_none()).count() as u64;
    let report = SimulateReport {
        params: ParamsRecord {
            baseline_m: params.baseline_m,
            baseline_w: params.baseline_w,
            lambda_m: params.lambda_m,
            lambda_w: params.lambda_w,
            n_prime_m: params.n_prime_m,
            n_prime_w: params.n_prime_w,
            n_dprime_m: params.n_dprime_m,
            n_dprime_w: params.n_dprime_w,
        },
        seed: g.seed,
        trials: a.trials,
        tested_class: a.class.as_str().to_owned(),
        alpha: g.alpha,
        rejections,
        degenerate,
        rejection_rate: rejections as f64 / a.trials as f64,
        ratio_before: gender_ratio(&params, false).ok(),
        ratio_after: gender_ratio(&params, true).ok(),
        disturbance: disturbance(&params).ok(),
    };

    let dir = g.run_dir("simulate", None)?;
    formats::table::write(&dir.join("trials.csv"), &rows)?;
    let text = table(
        &["Trials", "class", "alpha", "rejections", "degenerate", "rejection rate", "ratio before", "ratio after", "D"],
        &[vec![
            report.trials.to_string(),
            report.tested_class.clone(),
            num(report.alpha),
            report.rejections.to_string(),
            report.degenerate.to_string(),
            num(report.rejection_rate),
            opt_num(report.ratio_before),
            opt_num(report.ratio_after),
            opt_num(report.disturbance),
        ]],
    );
    write_report(&dir, &report, &text)?;
    Ok(dir)
}
