//! The `taptest` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use taptest_core::seed::{derive_seed, Key};
use taptest_core::{
    default_classes, project_unknown, segment, synth_dataset, synth_signal, ClassParams, TapTable,
};

use crate::config::RunConfig;
use crate::csv_io::{self, PredictionRow};
use crate::error::{Error, Result};
use crate::model;
use crate::pipeline::{self, Components, TrainOptions, REPLICA_TRAIN_COUNTS};
use crate::plot::{self, Series};
use crate::wav;

#[derive(Debug, Parser)]
#[command(name = "taptest", version, about = "Tap-test classification with PCA and k-means regions")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory relative output paths are written under.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled table of synthetic sub-signals.
    Simulate(SimulateArgs),
    /// Cut taps out of WAV recordings.
    Segment(SegmentArgs),
    /// Split a labeled table, fit PCA and the regions, save the model.
    Train(TrainArgs),
    /// Predict the class of every row of a tap table.
    Classify(ModelArgs),
    /// Confusion matrix and accuracy of a model on a labeled table.
    Evaluate(ModelArgs),
    /// Place unknown taps relative to the trained regions.
    Project(ModelArgs),
    /// Scatter plot of score files over the trained regions (SVG).
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Use the first N default classes.
    #[arg(long, conflicts_with = "class")]
    classes: Option<usize>,
    /// Custom class as LABEL:AMPLITUDE:OMEGA (repeatable).
    #[arg(long, value_name = "LABEL:AMP:OMEGA")]
    class: Vec<String>,
    /// Sub-signals per class.
    #[arg(long)]
    count: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Samples kept per sub-signal.
    #[arg(long)]
    n: Option<usize>,
    /// Also write one WAV per class (concatenated sub-signals) into this directory.
    #[arg(long, value_name = "DIR")]
    wav: Option<PathBuf>,
    #[arg(short, long, default_value = "simulated.csv")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(required = true)]
    wavs: Vec<PathBuf>,
    /// Label for the taps: once for all files, or once per file.
    #[arg(long)]
    label: Vec<String>,
    /// Peak-detection window, seconds.
    #[arg(long)]
    window: Option<f64>,
    /// Samples per tap.
    #[arg(long)]
    tap_length: Option<usize>,
    /// Lower outlier factor on the median peak amplitude.
    #[arg(long)]
    low: Option<f64>,
    /// Upper outlier factor on the median peak amplitude.
    #[arg(long)]
    high: Option<f64>,
    #[arg(short, long, default_value = "taps.csv")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    table: PathBuf,
    /// Training fraction per class.
    #[arg(long)]
    split: Option<f64>,
    /// Number of clusters; defaults to the number of classes.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Principal components the regions live in.
    #[arg(long, conflicts_with = "variance")]
    components: Option<usize>,
    /// Pick components by cumulative explained variance instead.
    #[arg(long)]
    variance: Option<f64>,
    /// Train on exactly 44, 43 and 40 rows of the first three classes (sorted by label).
    #[arg(long, conflicts_with = "train_count")]
    table1_replica: bool,
    /// Exact training rows for one class, as LABEL=N (repeatable).
    #[arg(long, value_name = "LABEL=N")]
    train_count: Vec<String>,
    /// Model directory.
    #[arg(short, long, default_value = "model")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    table: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    model: PathBuf,
    /// Score CSVs; the first is drawn filled, the rest hollow.
    #[arg(required = true)]
    scores: Vec<PathBuf>,
    #[arg(short, long, default_value = "regions.svg")]
    output: PathBuf,
}

struct Ctx {
    seed: u64,
    config: RunConfig,
    output_dir: Option<PathBuf>,
}

impl Ctx {
    fn out(&self, p: &Path) -> Result<PathBuf> {
        let path = match &self.output_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(path)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status; diagnostics go to stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_exit() -> i32 {
    run_from(std::env::args_os())
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx { seed: cli.seed.or(config.seed).unwrap_or(0), config, output_dir: cli.output_dir };
    match cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Segment(a) => segment_cmd(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Classify(a) => classify(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Project(a) => project(&ctx, a),
        Command::Plot(a) => plot_cmd(&ctx, a),
    }
}

fn parse_class(spec: &str) -> Result<ClassParams> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Usage(format!("--class expects LABEL:AMP:OMEGA, got {spec:?}"));
    if parts.len() != 3 || parts[0].is_empty() {
        return Err(bad());
    }
    let a = parts[1].parse().map_err(|_| bad())?;
    let w = parts[2].parse().map_err(|_| bad())?;
    Ok(ClassParams::new(parts[0], a, w))
}

fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let classes = if !a.class.is_empty() {
        a.class.iter().map(|s| parse_class(s)).collect::<Result<Vec<_>>>()?
    } else {
        let all = ctx.config.classes.clone().unwrap_or_else(default_classes);
        match a.classes {
            Some(0) => return Err(Error::Usage("--classes must be at least 1".into())),
            Some(k) if k > all.len() => {
                return Err(Error::Usage(format!("--classes {k}: only {} classes are defined", all.len())));
            }
            Some(k) => all[..k].to_vec(),
            None => all,
        }
    };
    let mut cfg = ctx.config.synth.clone();
    cfg.sub_signals_per_class = a.count.unwrap_or(cfg.sub_signals_per_class);
    cfg.noise_std = a.noise.unwrap_or(cfg.noise_std);
    cfg.sample_rate = a.sample_rate.unwrap_or(cfg.sample_rate);
    cfg.duration = a.duration.unwrap_or(cfg.duration);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.rng_seed = derive_seed(ctx.seed, &[Key::Str("simulate")]);

    let table = synth_dataset(&classes, &cfg)?;
    let out = ctx.out(&a.output)?;
    csv_io::write_tap_table(&out, &table)?;
    eprintln!("wrote {} rows × {} samples to {}", table.m(), table.n(), out.display());

    if let Some(dir) = a.wav {
        let dir = ctx.out(&dir.join("x"))?.parent().unwrap().to_path_buf();
        for class in &classes {
            let mut samples = Vec::new();
            for i in 0..cfg.sub_signals_per_class {
                samples.extend(synth_signal(class, &cfg, i)?.samples);
            }
            let w = taptest_core::Waveform::new(samples, cfg.sample_rate)?;
            wav::write_wav(&dir.join(format!("{}.wav", class.label)), &w, Some(&class.label))?;
        }
    }
    Ok(())
}

fn segment_cmd(ctx: &Ctx, a: SegmentArgs) -> Result<()> {
    let mut cfg = ctx.config.segmentation.clone();
    cfg.peak_window = a.window.unwrap_or(cfg.peak_window);
    cfg.tap_length_n = a.tap_length.unwrap_or(cfg.tap_length_n);
    cfg.low_factor = a.low.unwrap_or(cfg.low_factor);
    cfg.high_factor = a.high.unwrap_or(cfg.high_factor);
    cfg.validate()?;
    if !(a.label.is_empty() || a.label.len() == 1 || a.label.len() == a.wavs.len()) {
        return Err(Error::Usage(format!(
            "give one --label for all files or one per file ({} files, {} labels)",
            a.wavs.len(),
            a.label.len()
        )));
    }
    let mut all = TapTable::new(cfg.tap_length_n);
    for (i, path) in a.wavs.iter().enumerate() {
        let w = wav::read_wav(path)?;
        let taps = segment(&w, &cfg).map_err(|e| Error::format(path, e.to_string()))?;
        let label = a.label.get(i).or(a.label.first());
        let labels = label.map(|l| vec![l.clone(); taps.m()]);
        all.append(&TapTable::from_matrix(taps.matrix().clone(), labels)?)?;
        eprintln!("{}: {} taps", path.display(), taps.m());
    }
    let out = ctx.out(&a.output)?;
    csv_io::write_tap_table(&out, &all)?;
    Ok(())
}

fn parse_train_counts(specs: &[String]) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for s in specs {
        let (l, n) = s
            .split_once('=')
            .and_then(|(l, n)| Some((l, n.parse::<usize>().ok()?)))
            .filter(|(l, _)| !l.is_empty())
            .ok_or_else(|| Error::Usage(format!("--train-count expects LABEL=N, got {s:?}")))?;
        if out.insert(l.to_string(), n).is_some() {
            return Err(Error::Usage(format!("--train-count given twice for {l:?}")));
        }
    }
    Ok(out)
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let table = csv_io::read_tap_table(&a.table)?;
    let fixed_train_counts = if a.table1_replica {
        let classes = table.distinct_labels();
        if classes.len() > REPLICA_TRAIN_COUNTS.len() {
            return Err(Error::Usage(format!(
                "--table1-replica covers at most {} classes, table has {}",
                REPLICA_TRAIN_COUNTS.len(),
                classes.len()
            )));
        }
        classes.into_iter().zip(REPLICA_TRAIN_COUNTS).collect()
    } else {
        parse_train_counts(&a.train_count)?
    };
    let cfg = &ctx.config;
    let components = match (a.components, a.variance) {
        (Some(c), _) => Components::Fixed(c),
        (None, Some(t)) => Components::Variance(t),
        (None, None) => cfg.components(),
    };
    let mut kmeans = cfg.kmeans.clone();
    kmeans.restarts = a.restarts.unwrap_or(kmeans.restarts);
    let opts = TrainOptions {
        seed: ctx.seed,
        split_fraction: a.split.or(cfg.split_fraction).unwrap_or(0.6),
        fixed_train_counts,
        k: a.k.or(cfg.k),
        kmeans,
        components,
        segmentation: cfg.segmentation.clone(),
    };
    let outcome = pipeline::train(&table, &opts)?;
    let dir = ctx.out(&a.output.join("model.json"))?.parent().unwrap().to_path_buf();
    model::save(&outcome.machine, &dir.join("model.json"))?;
    csv_io::write_tap_table(&dir.join("train.csv"), &outcome.train)?;
    if !outcome.test.is_empty() {
        csv_io::write_tap_table(&dir.join("test.csv"), &outcome.test)?;
    }
    let c = outcome.machine.regions.c();
    csv_io::write_scores(&dir.join("train_scores.csv"), &outcome.machine.pca.transform(&outcome.train, c)?)?;
    if !outcome.test.is_empty() {
        csv_io::write_scores(&dir.join("test_scores.csv"), &outcome.machine.pca.transform(&outcome.test, c)?)?;
    }
    let mut report = pipeline::training_report(&outcome);
    if !outcome.test.is_empty() {
        report.push('\n');
        report.push_str(&pipeline::evaluation_report(&pipeline::evaluate(&outcome.machine, &outcome.test)?));
    }
    csv_io::write_text(&dir.join("report.txt"), &report)?;
    print!("{report}");
    eprintln!("model written to {}", dir.display());
    Ok(())
}

fn load_for(m: &model::TrainedMachine, path: &Path) -> Result<TapTable> {
    let table = csv_io::read_tap_table(path)?;
    if table.n() != m.pca.n() {
        return Err(Error::format(
            path,
            format!("rows have {} samples, the model expects {}", table.n(), m.pca.n()),
        ));
    }
    Ok(table)
}

fn classify(ctx: &Ctx, a: ModelArgs) -> Result<()> {
    let m = model::load(&a.model)?;
    let table = load_for(&m, &a.table)?;
    let places = project_unknown(&m.pca, &m.regions, &table)?;
    let out = ctx.out(a.output.as_deref().unwrap_or(Path::new("predictions.csv")))?;
    write_places(&out, &m, &table, &places)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &places {
        *counts.entry(&p.nearest).or_insert(0) += 1;
    }
    for (label, n) in counts {
        println!("{label}: {n}");
    }
    Ok(())
}

fn write_places(out: &Path, m: &model::TrainedMachine, table: &TapTable, places: &[taptest_core::Placement]) -> Result<()> {
    csv_io::write_predictions(
        out,
        m.regions.labels(),
        places.iter().enumerate().map(|(i, p)| PredictionRow {
            label: table.label(i),
            predicted: &p.nearest,
            score: &p.score,
            normalized_distances: &p.normalized_distances,
        }),
    )
}

fn evaluate(ctx: &Ctx, a: ModelArgs) -> Result<()> {
    let m = model::load(&a.model)?;
    let table = load_for(&m, &a.table)?;
    let cm = pipeline::evaluate(&m, &table)?;
    print!("{}", pipeline::evaluation_report(&cm));
    let out = ctx.out(a.output.as_deref().unwrap_or(Path::new("confusion.csv")))?;
    csv_io::write_confusion(&out, &cm)
}

fn project(ctx: &Ctx, a: ModelArgs) -> Result<()> {
    let m = model::load(&a.model)?;
    let table = load_for(&m, &a.table)?;
    let places = project_unknown(&m.pca, &m.regions, &table)?;
    let out = ctx.out(a.output.as_deref().unwrap_or(Path::new("placements.csv")))?;
    write_places(&out, &m, &table, &places)?;
    println!("mean normalized distance to each region over {} taps:", places.len());
    for (j, label) in m.regions.labels().iter().enumerate() {
        let mean = places.iter().map(|p| p.normalized_distances[j]).sum::<f64>() / places.len() as f64;
        println!("  {label}: {mean:.4}");
    }
    Ok(())
}

fn plot_cmd(ctx: &Ctx, a: PlotArgs) -> Result<()> {
    let m = model::load(&a.model)?;
    let c = m.regions.c();
    let mut series: Vec<Series> = Vec::new();
    for (f, path) in a.scores.iter().enumerate() {
        let file = csv_io::read_scores(path)?;
        if file.scores.component_count() < c {
            return Err(Error::format(
                path,
                format!("{} score columns, the model regions need {c}", file.scores.component_count()),
            ));
        }
        for i in 0..file.scores.len() {
            let label = file.display_label(i);
            let row = file.scores.row(i);
            let point = [row[0], row.get(1).copied().unwrap_or(0.0)];
            match series.iter_mut().find(|s| s.label == label && s.hollow == (f > 0)) {
                Some(s) => s.points.push(point),
                None => series.push(Series { label: label.to_string(), points: vec![point], hollow: f > 0 }),
            }
        }
    }
    let p = m.pca.explained_variance();
    let title = |j: usize| format!("PC{} ({:.1}%)", j + 1, p.get(j).copied().unwrap_or(0.0) * 100.0);
    let svg = plot::render_svg(&m.regions, &series, [&title(0), &title(1)])?;
    let out = ctx.out(&a.output)?;
    csv_io::write_text(&out, &svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_specs() {
        let c = parse_class("steel:1.2:30").unwrap();
        assert_eq!((c.label.as_str(), c.amplitude, c.angular_frequency), ("steel", 1.2, 30.0));
        assert!(parse_class("steel:1.2").is_err());
        assert!(parse_class(":1:2").is_err());
        assert!(parse_class("a:x:2").is_err());
    }

    #[test]
    fn train_count_specs() {
        let m = parse_train_counts(&["a=3".into(), "b=4".into()]).unwrap();
        assert_eq!(m["a"], 3);
        assert!(parse_train_counts(&["a=3".into(), "a=4".into()]).is_err());
        assert!(parse_train_counts(&["a".into()]).is_err());
        assert!(parse_train_counts(&["=3".into()]).is_err());
    }

    #[test]
    fn help_exits_zero_and_bad_usage_one() {
        assert_eq!(run_from(["taptest", "--help"]), 0);
        assert_eq!(run_from(["taptest", "simulate", "--bogus"]), 1);
        assert_eq!(run_from(["taptest"]), 1);
    }
}
