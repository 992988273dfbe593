//! Train / evaluate orchestration shared by the CLI and the test suites.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use taptest_core::seed::{derive_seed, Key};
use taptest_core::{
    confusion, kmeans_fit, map_clusters_to_labels, select_components, stratified_split, ConfusionMatrix,
    KMeansOptions, PcaModel, RegionModel, SegmentationConfig, Split, TapTable,
};

use crate::error::{Error, Result};
use crate::model::{Provenance, TrainedMachine};

/// How many principal components the regions live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Components {
    Fixed(usize),
    /// Smallest count reaching this cumulative explained-variance ratio.
    Variance(f64),
}

impl Default for Components {
    fn default() -> Self {
        Components::Fixed(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub seed: u64,
    pub split_fraction: f64,
    /// Exact training-row counts for some classes, overriding the fraction.
    pub fixed_train_counts: BTreeMap<String, usize>,
    /// Defaults to the number of distinct training labels.
    pub k: Option<usize>,
    pub kmeans: KMeansOptions,
    pub components: Components,
    pub segmentation: SegmentationConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            split_fraction: 0.6,
            fixed_train_counts: BTreeMap::new(),
            k: None,
            kmeans: KMeansOptions::default(),
            components: Components::default(),
            segmentation: SegmentationConfig::default(),
        }
    }
}

/// Per-class training counts for `--table1-replica`, in sorted label order.
pub const REPLICA_TRAIN_COUNTS: [usize; 3] = [44, 43, 40];

pub struct TrainOutcome {
    pub machine: TrainedMachine,
    pub split: Split,
    pub train: TapTable,
    pub test: TapTable,
}

/// Splits `table`, fits PCA on the training part and clusters its scores.
pub fn train(table: &TapTable, opts: &TrainOptions) -> Result<TrainOutcome> {
    let labels = table
        .labels()
        .ok_or_else(|| Error::Usage("training data must be labeled".into()))?;
    let classes = table.distinct_labels();
    if classes.len() < 2 {
        return Err(Error::Usage(format!(
            "training needs at least two labeled classes, found {}",
            classes.len()
        )));
    }
    let split_seed = derive_seed(opts.seed, &[Key::Str("split")]);
    let split = stratified_split(labels, opts.split_fraction, split_seed, &opts.fixed_train_counts)?;
    let train = table.select(&split.train);
    let test = table.select(&split.test);
    for class in &classes {
        let count = train.labels().unwrap().iter().filter(|l| *l == class).count();
        if count < 2 {
            return Err(Error::Usage(format!("class {class:?} has {count} training rows, need at least 2")));
        }
    }

    let pca = PcaModel::fit(&train)?;
    let c = match opts.components {
        Components::Fixed(c) => c,
        Components::Variance(t) => select_components(pca.explained_variance(), t)?,
    };
    let scores = pca.transform(&train, c)?;
    let k = opts.k.unwrap_or(classes.len());
    let kmeans = KMeansOptions { seed: derive_seed(opts.seed, &[Key::Str("kmeans")]), ..opts.kmeans.clone() };
    let fit = kmeans_fit(scores.matrix(), k, &kmeans)?;
    let cluster_labels = map_clusters_to_labels(&fit.assignments, train.labels().unwrap(), k)?;
    let regions = RegionModel::new(fit.centroids, cluster_labels)?;

    let segmentation = SegmentationConfig { tap_length_n: table.n(), ..opts.segmentation.clone() };
    let machine = TrainedMachine { pca, regions, segmentation, provenance: Provenance::describe(&train) };
    machine.validate().map_err(|m| Error::Data(taptest_core::Error::InvariantViolation(m)))?;
    Ok(TrainOutcome { machine, split, train, test })
}

/// Nearest-region predictions for every row of `table`.
pub fn predict(machine: &TrainedMachine, table: &TapTable) -> Result<Vec<String>> {
    let scores = machine.pca.transform(table, machine.regions.c())?;
    Ok(machine.regions.classify(&scores)?)
}

/// Confusion matrix of a labeled table against the machine's predictions,
/// over the machine's classes in sorted order.
pub fn evaluate(machine: &TrainedMachine, table: &TapTable) -> Result<ConfusionMatrix> {
    let truth = table
        .labels()
        .ok_or_else(|| Error::Usage("evaluation data must be labeled".into()))?;
    let predicted = predict(machine, table)?;
    let mut order = machine.regions.labels().to_vec();
    order.sort();
    Ok(confusion(truth, &predicted, &order)?)
}

fn class_counts(table: &TapTable) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for l in table.labels().into_iter().flatten() {
        *out.entry(l.clone()).or_insert(0) += 1;
    }
    out
}

/// Training report: per-class split counts and PC explained variance.
pub fn training_report(outcome: &TrainOutcome) -> String {
    let train = class_counts(&outcome.train);
    let test = class_counts(&outcome.test);
    let mut rows: Vec<[String; 3]> = Vec::new();
    for class in outcome.machine.regions.labels().iter().collect::<std::collections::BTreeSet<_>>() {
        rows.push([
            class.clone(),
            train.get(class).copied().unwrap_or(0).to_string(),
            test.get(class).copied().unwrap_or(0).to_string(),
        ]);
    }
    rows.push(["Total".into(), outcome.train.m().to_string(), outcome.test.m().to_string()]);
    let mut out = table(&["Selected experiments", "Training taps", "Testing taps"], &rows);
    let p = outcome.machine.pca.explained_variance();
    for (i, ratio) in p.iter().take(2).enumerate() {
        let _ = writeln!(out, "PC{} explained variance: {:.1}%", i + 1, ratio * 100.0);
    }
    let _ = writeln!(out, "Region dimensionality: {}", outcome.machine.regions.c());
    out
}

/// Evaluation report: per-class test counts, correct counts, accuracy and
/// the confusion matrix.
pub fn evaluation_report(cm: &ConfusionMatrix) -> String {
    let mut rows: Vec<[String; 3]> = cm
        .labels()
        .iter()
        .zip(cm.row_sums())
        .zip(cm.diagonal())
        .map(|((l, n), d)| [l.clone(), n.to_string(), d.to_string()])
        .collect();
    rows.push(["Total".into(), cm.total().to_string(), cm.trace().to_string()]);
    let mut out = table(&["Selected experiments", "Testing taps", "Correctly classified"], &rows);
    let _ = writeln!(out, "Accuracy: {:.1}%\n", cm.accuracy() * 100.0);
    let _ = write!(out, "{cm}");
    out
}

fn table(header: &[&str; 3], rows: &[[String; 3]]) -> String {
    let mut widths = header.map(str::len);
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}", header[0], header[1], header[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
    for r in rows {
        let _ = writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}", r[0], r[1], r[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use taptest_core::{default_classes, synth_dataset, SynthConfig};

    #[test]
    fn single_class_is_rejected() {
        let t = synth_dataset(&default_classes()[..1], &SynthConfig::default()).unwrap();
        assert!(matches!(train(&t, &TrainOptions::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn unlabeled_is_rejected() {
        let t = TapTable::from_rows(&[[1.0, 2.0], [2.0, 1.0]], None).unwrap();
        assert!(matches!(train(&t, &TrainOptions::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn tiny_classes_are_rejected() {
        let cfg = SynthConfig { sub_signals_per_class: 3, ..SynthConfig::default() };
        let t = synth_dataset(&default_classes()[..2], &cfg).unwrap();
        // floor(0.6 · 3) = 1 training row per class
        let err = train(&t, &TrainOptions::default()).err().unwrap();
        assert!(err.to_string().contains("need at least 2"), "{err}");
    }

    #[test]
    fn report_lists_split_counts() {
        let t = synth_dataset(&default_classes()[..2], &SynthConfig::default()).unwrap();
        let outcome = train(&t, &TrainOptions::default()).unwrap();
        let report = training_report(&outcome);
        assert!(report.contains("class1"));
        assert!(report.lines().any(|l| l.starts_with("Total") && l.contains("36") && l.contains("24")));
        assert!(report.contains("PC1 explained variance"));
    }

    #[test]
    fn variance_rule_can_pick_components() {
        let t = synth_dataset(&default_classes(), &SynthConfig::default()).unwrap();
        let opts = TrainOptions { components: Components::Variance(0.95), ..TrainOptions::default() };
        let outcome = train(&t, &opts).unwrap();
        assert!(outcome.machine.regions.c() > 2);
        assert_eq!(evaluate(&outcome.machine, &outcome.test).unwrap().total(), outcome.test.m());
    }
}
