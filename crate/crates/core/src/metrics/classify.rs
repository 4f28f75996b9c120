use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{standardize, Cell, ColumnKind, Dataset, StandardizedView};
use crate::distance::DistanceSpec;
use crate::engine::{run, RwnConfig};
use crate::error::{Result, RwnError};
use crate::rng::{derive_seed, Domain, Streams};

/// A predictor trained on one table and applied to another with the same
/// feature columns.
pub trait Classifier: Sync {
    fn fit_predict(&self, train: &Dataset, labels: &[u32], test: &Dataset) -> Result<Vec<u32>>;
}

/// k-nearest-neighbor majority vote on features standardized with the
/// training data's scaling. Distance ties go to the lower training index;
/// vote ties go to the class whose nearest member is closest.
#[derive(Debug, Clone, Copy)]
pub struct KnnClassifier {
    pub k: usize,
}

impl Default for KnnClassifier {
    fn default() -> Self {
        Self { k: 25 }
    }
}

impl Classifier for KnnClassifier {
    fn fit_predict(&self, train: &Dataset, labels: &[u32], test: &Dataset) -> Result<Vec<u32>> {
        if labels.len() != train.n() || train.n() == 0 {
            return Err(RwnError::ShapeMismatch(format!(
                "{} labels for {} training rows",
                labels.len(),
                train.n()
            )));
        }
        if self.k == 0 {
            return Err(RwnError::config("k", "classifier needs k >= 1"));
        }
        let spec = DistanceSpec::new(standardize(train));
        let test_view = StandardizedView::with_scaling(test, spec.view().scaling().to_vec())?;
        let k = self.k.min(train.n());
        Ok((0..test.n())
            .map(|t| {
                let mut d: Vec<(f64, usize)> = (0..train.n()).map(|i| (spec.cross(i, &test_view, t), i)).collect();
                let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if k < d.len() {
                    d.select_nth_unstable_by(k - 1, by);
                    d.truncate(k);
                }
                d.sort_unstable_by(by);
                let mut votes: Vec<(u32, usize)> = Vec::new();
                for &(_, i) in &d {
                    match votes.iter_mut().find(|v| v.0 == labels[i]) {
                        Some(v) => v.1 += 1,
                        None => votes.push((labels[i], 1)),
                    }
                }
                // first maximum = class seen earliest in distance order
                let best = votes.iter().map(|v| v.1).max().expect("k >= 1");
                votes.iter().find(|v| v.1 == best).expect("max exists").0
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationStudyConfig {
    /// Categorical label column.
    pub label: String,
    pub grid: Vec<RwnConfig>,
    pub holdout: usize,
    pub reps: usize,
    /// Seeds the splits. Each grid configuration's own seed is combined with
    /// the replication index.
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridResult {
    pub config: RwnConfig,
    pub rates: Vec<f64>,
    pub mean_rate: f64,
    /// `mean_rate − baseline`.
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationStudy {
    pub label: String,
    pub holdout: usize,
    pub reps: usize,
    /// Misclassification rate with unperturbed training data, per replication.
    pub baseline_rates: Vec<f64>,
    pub baseline: f64,
    pub grid: Vec<GridResult>,
    /// Splits redrawn because a class was absent from the training part.
    pub discarded_splits: usize,
}

const MAX_SPLIT_ATTEMPTS: u64 = 1000;

fn split(
    labels: &[Option<u32>],
    holdout: usize,
    streams: &Streams,
    rep: u64,
) -> Result<(Vec<usize>, Vec<usize>, usize)> {
    let mut classes: Vec<u32> = labels.iter().flatten().copied().collect();
    classes.sort_unstable();
    classes.dedup();
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut streams.stream(Domain::Split, rep, attempt));
        let (test, train) = idx.split_at(holdout);
        let mut seen = vec![false; classes.len()];
        for &i in train {
            if let Some(c) = labels[i] {
                seen[classes.binary_search(&c).expect("known class")] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            let (mut test, mut train) = (test.to_vec(), train.to_vec());
            test.sort_unstable();
            train.sort_unstable();
            return Ok((train, test, attempt as usize));
        }
    }
    Err(RwnError::InsufficientData(format!(
        "no split with every class in training after {MAX_SPLIT_ATTEMPTS} attempts"
    )))
}

fn error_rate<C: Classifier>(
    clf: &C,
    train: &Dataset,
    label: usize,
    test: &Dataset,
    test_labels: &[Option<u32>],
) -> Result<f64> {
    let keep: Vec<usize> = (0..train.n()).filter(|&i| !train.cell(i, label).is_missing()).collect();
    let labels: Vec<u32> = keep
        .iter()
        .map(|&i| match train.cell(i, label) {
            Cell::Categorical(c) => c,
            _ => unreachable!("label column is categorical and present"),
        })
        .collect();
    let features: Vec<usize> = (0..train.p()).filter(|&j| j != label).collect();
    let train_x = train.select_rows(&keep)?.select_columns(&features)?;
    let test_x = test.select_columns(&features)?;
    let predicted = clf.fit_predict(&train_x, &labels, &test_x)?;
    let (mut wrong, mut total) = (0usize, 0usize);
    for (p, truth) in predicted.iter().zip(test_labels) {
        if let Some(t) = truth {
            total += 1;
            wrong += usize::from(p != t);
        }
    }
    Ok(if total == 0 { 0.0 } else { wrong as f64 / total as f64 })
}

/// Train on (perturbed) training rows, score on the untouched holdout rows,
/// and average the misclassification rate over replications. The whole
/// training table, label included, is perturbed, as a released file would
/// be; records whose label ends up missing are dropped from training.
pub fn classification_study<C: Classifier>(
    d: &Dataset,
    cfg: &ClassificationStudyConfig,
    clf: &C,
) -> Result<ClassificationStudy> {
    let label = d
        .column_index(&cfg.label)
        .ok_or_else(|| RwnError::Schema(format!("no column named `{}`", cfg.label)))?;
    if d.schema()[label].kind != ColumnKind::Categorical {
        return Err(RwnError::Schema(format!(
            "label column `{}` is not categorical",
            cfg.label
        )));
    }
    if cfg.holdout == 0 || cfg.holdout >= d.n() {
        return Err(RwnError::config(
            "holdout",
            format!("{} must be in 1..n (n = {})", cfg.holdout, d.n()),
        ));
    }
    if cfg.reps == 0 {
        return Err(RwnError::config("reps", "must be >= 1"));
    }
    for c in &cfg.grid {
        c.validate()?;
    }
    let labels: Vec<Option<u32>> = (0..d.n())
        .map(|i| match d.cell(i, label) {
            Cell::Categorical(c) => Some(c),
            _ => None,
        })
        .collect();
    let streams = Streams::new(cfg.seed);

    let per_rep = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<(f64, Vec<f64>, usize)> {
            let (train_idx, test_idx, discarded) = split(&labels, cfg.holdout, &streams, rep)?;
            let train = d.select_rows(&train_idx)?;
            let test = d.select_rows(&test_idx)?;
            let test_labels: Vec<Option<u32>> = test_idx.iter().map(|&i| labels[i]).collect();
            let baseline = error_rate(clf, &train, label, &test, &test_labels)?;
            let grid = cfg
                .grid
                .iter()
                .map(|g| {
                    let g = RwnConfig {
                        seed: derive_seed(g.seed, Domain::Replication, rep),
                        ..g.clone()
                    };
                    let (_, released) = run(&train, &g)?;
                    error_rate(clf, released.data(), label, &test, &test_labels)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((baseline, grid, discarded))
        })
        .collect::<Result<Vec<_>>>()?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let baseline_rates: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let baseline = mean(&baseline_rates);
    let grid = cfg
        .grid
        .iter()
        .enumerate()
        .map(|(g, config)| {
            let rates: Vec<f64> = per_rep.iter().map(|r| r.1[g]).collect();
            let mean_rate = mean(&rates);
            GridResult {
                config: config.clone(),
                rates,
                mean_rate,
                delta: mean_rate - baseline,
            }
        })
        .collect();
    Ok(ClassificationStudy {
        label: cfg.label.clone(),
        holdout: cfg.holdout,
        reps: cfg.reps,
        baseline_rates,
        baseline,
        grid,
        discarded_splits: per_rep.iter().map(|r| r.2).sum(),
    })
}
