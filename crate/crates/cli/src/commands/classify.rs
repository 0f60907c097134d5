use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use electorate_core::cnn::{self, Architecture, EvalMetrics, TrainConfig};
use electorate_core::image::{preprocess as preprocess_image, FaceBox, FaceTensor, Preprocessed, RawProfileImage};
use electorate_core::labeler::{self, NameLexicon, WeakLabel};
use electorate_core::synthetic::separable_dataset;
use electorate_core::Gender;
use rayon::prelude::*;
use serde::Serialize;

use super::{load_tensors, predict_all, Globals};
use crate::error::{bad_input, InputContext};
use crate::formats::{self, table::*};
use crate::report::{num, table, write_report};

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// CSV with columns user_id,path,x,y,w,h; one row per detected face, empty
    /// box fields for an image without faces. Paths are relative to the
    /// manifest's directory.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Tensor file to write; user IDs go to the `.ids` sidecar.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// CSV with columns user_id,display_name.
    #[arg(long)]
    pub names: PathBuf,
    /// Label CSV to write (default: labels.csv in the run directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub tensors: PathBuf,
    /// CSV with columns user_id,label (male, female or unknown).
    #[arg(long)]
    pub labels: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Train on every labeled example instead of a 1:1 class sample.
    #[arg(long)]
    pub no_balance: bool,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 8)]
    pub c1: usize,
    #[arg(long, default_value_t = 16)]
    pub c2: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub tensors: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Class treated as positive for precision and recall.
    #[arg(long, default_value = "female")]
    pub positive: Gender,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub tensors: PathBuf,
    /// Prediction CSV to write (default: predictions.csv in the run directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub first_id: u64,
    /// Tensor file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Label CSV to write.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Display-name CSV to write, one lexicon name per user matching its class.
    #[arg(long)]
    pub names: Option<PathBuf>,
}

fn lexicon(g: &Globals) -> anyhow::Result<(NameLexicon, Vec<String>)> {
    match &g.lexicon_dir {
        Some(dir) => formats::lexicon::load_dir(dir).bad_input(format_args!("lexicon {}", dir.display())),
        None => Ok((formats::lexicon::builtin(), Vec::new())),
    }
}

fn read_table<T: for<'de> serde::Deserialize<'de>>(path: &Path, what: &str) -> anyhow::Result<Vec<T>> {
    formats::table::read(path).bad_input(format_args!("{what} {}", path.display()))
}

fn load_labels(path: &Path) -> anyhow::Result<HashMap<u64, WeakLabel>> {
    let rows: Vec<LabelRow> = read_table(path, "labels")?;
    let mut map = HashMap::with_capacity(rows.len());
    for row in rows {
        let label = row.weak_label().bad_input(format_args!("labels {}", path.display()))?;
        if map.insert(row.user_id, label).is_some() {
            return Err(bad_input(format!("labels {}: duplicate user {}", path.display(), row.user_id)));
        }
    }
    Ok(map)
}

/// Tensors paired with their weak labels, in tensor-file order.
fn labeled_tensors(tensors: &Path, labels: &Path) -> anyhow::Result<Vec<(FaceTensor, WeakLabel)>> {
    let labels = load_labels(labels)?;
    Ok(load_tensors(tensors)?
        .into_iter()
        .map(|t| {
            let l = labels.get(&t.user_id).copied().unwrap_or(WeakLabel::Unknown);
            (t, l)
        })
        .collect())
}

fn box_of(row: &ManifestRow) -> anyhow::Result<Option<FaceBox>> {
    match (row.x, row.y, row.w, row.h) {
        (Some(x), Some(y), Some(w), Some(h)) => Ok(Some(FaceBox::new(x, y, w, h))),
        (None, None, None, None) => Ok(None),
        _ => Err(bad_input(format!("manifest: user {} has a partial face box", row.user_id))),
    }
}

fn decode_image(path: &Path, user_id: u64, faces: Vec<FaceBox>) -> anyhow::Result<RawProfileImage> {
    let byte_size = fs::metadata(path).bad_input(format_args!("image {}", path.display()))?.len();
    let rgb = ::image::open(path).bad_input(format_args!("image {}", path.display()))?.to_rgb8();
    let (width, height) = rgb.dimensions();
    Ok(RawProfileImage { user_id, byte_size, width, height, pixels: rgb.into_raw(), faces })
}

#[derive(Debug, Serialize)]
struct RejectionRow {
    user_id: u64,
    reason: &'static str,
}

#[derive(Debug, Serialize)]
struct WarningRow {
    user_id: u64,
    aspect_ratio: f64,
}

#[derive(Debug, Serialize)]
struct PreprocessReport {
    images: usize,
    tensors: usize,
    rejected_no_face: usize,
    rejected_too_small: usize,
    aspect_warnings: usize,
    min_bytes: u64,
    output: String,
}

pub fn preprocess(g: &Globals, a: PreprocessArgs) -> anyhow::Result<PathBuf> {
    let rows: Vec<ManifestRow> = read_table(&a.manifest, "manifest")?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));

    // One image per user, in order of first appearance.
    let mut order: Vec<(u64, String, Vec<FaceBox>)> = Vec::new();
    let mut slot: HashMap<u64, usize> = HashMap::new();
    for row in &rows {
        let face = box_of(row)?;
        let i = *slot.entry(row.user_id).or_insert_with(|| {
            order.push((row.user_id, row.path.clone(), Vec::new()));
            order.len() - 1
        });
        if order[i].1 != row.path {
            return Err(bad_input(format!("manifest: user {} lists more than one image", row.user_id)));
        }
        order[i].2.extend(face);
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build()?;
    let results: Vec<anyhow::Result<Preprocessed>> = pool.install(|| {
        order
            .into_par_iter()
            .map(|(user_id, path, faces)| {
                let image = decode_image(&base.join(&path), user_id, faces)?;
                preprocess_image(&image, g.min_bytes).map_err(anyhow::Error::from)
            })
            .collect()
    });

    let (mut tensors, mut rejections, mut warnings) = (Vec::new(), Vec::new(), Vec::new());
    for r in results {
        match r? {
            Preprocessed::Accepted { tensor, warning } => {
                tensors.push(tensor);
                warnings.extend(warning.map(|w| WarningRow { user_id: w.user_id, aspect_ratio: w.ratio }));
            }
            Preprocessed::Rejected(r) => rejections.push(RejectionRow { user_id: r.user_id, reason: r.reason.as_str() }),
        }
    }
    formats::tensor::save(&a.output, &tensors)?;

    let dir = g.run_dir("preprocess", None)?;
    formats::table::write(&dir.join("rejections.csv"), &rejections)?;
    formats::table::write(&dir.join("warnings.csv"), &warnings)?;
    let count = |reason| rejections.iter().filter(|r| r.reason == reason).count();
    let report = PreprocessReport {
        images: tensors.len() + rejections.len(),
        tensors: tensors.len(),
        rejected_no_face: count("no-face"),
        rejected_too_small: count("too-small"),
        aspect_warnings: warnings.len(),
        min_bytes: g.min_bytes,
        output: a.output.display().to_string(),
    };
    let text = table(
        &["Images", "tensors", "no face", "too small", "aspect warnings"],
        &[vec![
            report.images.to_string(),
            report.tensors.to_string(),
            report.rejected_no_face.to_string(),
            report.rejected_too_small.to_string(),
            report.aspect_warnings.to_string(),
        ]],
    );
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct LabelReport {
    users: usize,
    male: usize,
    female: usize,
    unknown: usize,
    lexicon_male: usize,
    lexicon_female: usize,
    /// Names listed under both genders and left out of the lexicon.
    ambiguous: Vec<String>,
}

pub fn label(g: &Globals, a: LabelArgs) -> anyhow::Result<PathBuf> {
    let (lex, ambiguous) = lexicon(g)?;
    let names: Vec<NameRow> = read_table(&a.names, "names")?;
    let rows: Vec<LabelRow> =
        names.iter().map(|n| LabelRow::new(n.user_id, labeler::label(&n.display_name, &lex))).collect();
    let dir = g.run_dir("label", None)?;
    let output = a.output.unwrap_or_else(|| dir.join("labels.csv"));
    formats::table::write(&output, &rows)?;
    let count = |s: &str| rows.iter().filter(|r| r.label == s).count();
    let report = LabelReport {
        users: rows.len(),
        male: count("male"),
        female: count("female"),
        unknown: count("unknown"),
        lexicon_male: lex.male_len(),
        lexicon_female: lex.female_len(),
        ambiguous,
    };
    let text = table(
        &["Users", "male", "female", "unknown"],
        &[vec![report.users.to_string(), report.male.to_string(), report.female.to_string(), report.unknown.to_string()]],
    );
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct LossRow {
    epoch: usize,
    loss: f64,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    examples: usize,
    male: usize,
    female: usize,
    balanced: bool,
    epochs: usize,
    learning_rate: f64,
    batch_size: usize,
    c1: usize,
    c2: usize,
    seed: u64,
    loss_trace: Vec<f64>,
    train_accuracy: f64,
    output: String,
}

pub fn train(g: &Globals, a: TrainArgs) -> anyhow::Result<PathBuf> {
    let labeled = labeled_tensors(&a.tensors, &a.labels)?;
    let data: Vec<(FaceTensor, Gender)> = if a.no_balance {
        labeled.into_iter().filter_map(|(t, l)| l.gender().map(|g| (t, g))).collect()
    } else {
        labeler::balance(labeled, g.seed).bad_input("training labels")?
    };
    let config = TrainConfig {
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed: g.seed,
        arch: Architecture::new(a.c1, a.c2),
    };
    config.validate().bad_input("training configuration")?;
    if data.is_empty() {
        return Err(bad_input("no labeled tensors to train on"));
    }
    let out = cnn::train(&data, &config)?;
    formats::model::save(&out.params, &a.output)?;
    let fit = cnn::evaluate(&out.params, &data, Gender::Female)?;

    let dir = g.run_dir("train", None)?;
    let loss: Vec<LossRow> = out.loss_trace.iter().enumerate().map(|(i, &l)| LossRow { epoch: i + 1, loss: l }).collect();
    formats::table::write(&dir.join("loss.csv"), &loss)?;
    let count = |x| data.iter().filter(|(_, g)| *g == x).count();
    let report = TrainReport {
        examples: data.len(),
        male: count(Gender::Male),
        female: count(Gender::Female),
        balanced: !a.no_balance,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        c1: a.c1,
        c2: a.c2,
        seed: g.seed,
        loss_trace: out.loss_trace,
        train_accuracy: fit.accuracy,
        output: a.output.display().to_string(),
    };
    let rows: Vec<Vec<String>> = loss.iter().map(|r| vec![r.epoch.to_string(), num(r.loss)]).collect();
    let mut text = format!(
        "{} examples ({} male, {} female), training accuracy {}\n\n",
        report.examples,
        report.male,
        report.female,
        num(report.train_accuracy)
    );
    text.push_str(&table(&["Epoch", "mean loss"], &rows));
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    positive: String,
    examples: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    accuracy: f64,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
}

pub fn evaluate(g: &Globals, a: EvaluateArgs) -> anyhow::Result<PathBuf> {
    let params = g.require_model()?;
    let data: Vec<(FaceTensor, Gender)> = labeled_tensors(&a.tensors, &a.labels)?
        .into_iter()
        .filter_map(|(t, l)| l.gender().map(|g| (t, g)))
        .collect();
    if data.is_empty() {
        return Err(bad_input("no labeled tensors to evaluate"));
    }
    let EvalMetrics { precision, recall, f1, accuracy, confusion: c } = cnn::evaluate(&params, &data, a.positive)?;
    let report = EvaluateReport {
        positive: a.positive.as_str().to_owned(),
        examples: data.len(),
        precision,
        recall,
        f1,
        accuracy,
        tp: c.tp,
        fp: c.fp,
        fn_: c.fn_,
        tn: c.tn,
    };
    let text = table(
        &["Class", "precision", "recall", "F1", "accuracy"],
        &[vec![report.positive.clone(), num(precision), num(recall), num(f1), num(accuracy)]],
    );
    let dir = g.run_dir("evaluate", None)?;
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct ClassifyReport {
    tensors: usize,
    male: usize,
    female: usize,
    output: String,
}

pub fn classify(g: &Globals, a: ClassifyArgs) -> anyhow::Result<PathBuf> {
    let params = g.require_model()?;
    let tensors = load_tensors(&a.tensors)?;
    let predictions = predict_all(g, &params, &tensors)?;
    let rows: Vec<PredictionRow> = predictions
        .iter()
        .map(|&(user_id, class, p_male)| PredictionRow { user_id, label: class.as_str().to_owned(), p_male })
        .collect();
    let dir = g.run_dir("classify", None)?;
    let output = a.output.unwrap_or_else(|| dir.join("predictions.csv"));
    formats::table::write(&output, &rows)?;
    let male = predictions.iter().filter(|p| p.1 == Gender::Male).count();
    let report = ClassifyReport { tensors: rows.len(), male, female: rows.len() - male, output: output.display().to_string() };
    let text = table(
        &["Tensors", "male", "female"],
        &[vec![report.tensors.to_string(), report.male.to_string(), report.female.to_string()]],
    );
    write_report(&dir, &report, &text)?;
    Ok(dir)
}

const SYNTH_MALE_NAMES: [&str; 4] = ["David", "John", "Luke", "Michael"];
const SYNTH_FEMALE_NAMES: [&str; 4] = ["Caroline", "Elizabeth", "Emily", "Maria"];

#[derive(Debug, Serialize)]
struct SynthReport {
    count: usize,
    first_id: u64,
    seed: u64,
    output: String,
}

pub fn synth(g: &Globals, a: SynthArgs) -> anyhow::Result<PathBuf> {
    let data = separable_dataset(a.count, a.first_id, g.seed);
    let tensors: Vec<FaceTensor> = data.iter().map(|(t, _)| t.clone()).collect();
    formats::tensor::save(&a.output, &tensors)?;
    if let Some(path) = &a.labels {
        let rows: Vec<LabelRow> = data.iter().map(|(t, g)| LabelRow::new(t.user_id, WeakLabel::Known(*g))).collect();
        formats::table::write(path, &rows)?;
    }
    if let Some(path) = &a.names {
        let rows: Vec<NameRow> = data
            .iter()
            .enumerate()
            .map(|(i, (t, g))| {
                let pool = if *g == Gender::Male { SYNTH_MALE_NAMES } else { SYNTH_FEMALE_NAMES };
                NameRow { user_id: t.user_id, display_name: format!("{} Doe", pool[(i / 2) % pool.len()]) }
            })
            .collect();
        formats::table::write(path, &rows)?;
    }
    let report = SynthReport { count: a.count, first_id: a.first_id, seed: g.seed, output: a.output.display().to_string() };
    let dir = g.run_dir("synth-faces", None)?;
    write_report(&dir, &report, &format!("{} synthetic faces written to {}\n", a.count, report.output))?;
    Ok(dir)
}
