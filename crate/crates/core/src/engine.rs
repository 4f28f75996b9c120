//! The perturbation itself: every cell of every record is, with probability
//! `q`, replaced by the same column's value in a randomly chosen neighbor.
//! A fresh neighbor is drawn for each replaced cell.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{standardize, Cell, Dataset};
use crate::distance::DistanceSpec;
use crate::error::{Result, RwnError};
use crate::neighborhoods::{self, Backend, BackendKind, NeighborhoodSet};
use crate::rng::{Domain, Streams};

/// All tuning parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwnConfig {
    pub eps: f64,
    pub k: usize,
    pub q: f64,
    pub seed: u64,
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    /// Pool size (pool) or expected sampled pairs per record (pair-sample).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Partition count (partitioned).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    /// Backend run inside each partition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<BackendKind>,
    #[serde(default)]
    pub fresh_pool_per_point: bool,
    /// Per-column distance weights by column name; unlisted columns get 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, f64>,
}

fn default_backend() -> BackendKind {
    BackendKind::Exact
}

impl Default for RwnConfig {
    fn default() -> Self {
        Self {
            eps: 0.0,
            k: 5,
            q: 1.0,
            seed: 0,
            backend: BackendKind::Exact,
            m: None,
            u: None,
            inner: None,
            fresh_pool_per_point: false,
            weights: BTreeMap::new(),
        }
    }
}

impl RwnConfig {
    pub fn new(eps: f64, k: usize, q: f64, seed: u64) -> Self {
        Self {
            eps,
            k,
            q,
            seed,
            ..Self::default()
        }
    }

    /// Range and presence checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(RwnError::config("q", format!("must be in [0, 1], got {}", self.q)));
        }
        neighborhoods::check_rule(self.eps)?;
        for (name, w) in &self.weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(RwnError::config("weights", format!("`{name}` has weight {w}")));
            }
        }
        self.backend_spec().map(|_| ())
    }

    pub fn backend_spec(&self) -> Result<Backend> {
        let need_m = |field_owner: BackendKind| -> Result<usize> {
            match self.m {
                Some(m) if m >= 1 => Ok(m),
                Some(_) => Err(RwnError::config("m", "must be >= 1")),
                None => Err(RwnError::config(
                    "m",
                    format!("is required by the {field_owner} backend"),
                )),
            }
        };
        let simple = |kind: BackendKind| -> Result<Backend> {
            Ok(match kind {
                BackendKind::Exact => Backend::Exact,
                BackendKind::Pool => Backend::Pool {
                    m: need_m(kind)?,
                    fresh_pool_per_point: self.fresh_pool_per_point,
                },
                BackendKind::PairSample => Backend::PairSample { m: need_m(kind)? },
                BackendKind::Partitioned => {
                    return Err(RwnError::config("inner", "partitioned backends cannot be nested"))
                }
            })
        };
        match self.backend {
            BackendKind::Partitioned => {
                let u = match self.u {
                    Some(u) if u >= 1 => u,
                    Some(_) => return Err(RwnError::config("u", "must be >= 1")),
                    None => return Err(RwnError::config("u", "is required by the partitioned backend")),
                };
                let inner = simple(self.inner.unwrap_or(BackendKind::Exact))?;
                Ok(Backend::Partitioned {
                    u,
                    inner: Box::new(inner),
                })
            }
            kind => simple(kind),
        }
    }

    /// Distance weights in column order.
    pub fn weight_vector(&self, d: &Dataset) -> Result<Vec<f64>> {
        let mut w = vec![1.0; d.p()];
        for (name, &value) in &self.weights {
            let j = d
                .column_index(name)
                .ok_or_else(|| RwnError::config("weights", format!("unknown column `{name}`")))?;
            w[j] = value;
        }
        Ok(w)
    }

    pub fn distance_spec(&self, d: &Dataset) -> Result<DistanceSpec> {
        DistanceSpec::with_weights(standardize(d), self.weight_vector(d)?)
    }
}

/// The released data plus per-cell and per-record flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedDataset {
    data: Dataset,
    modified: Vec<bool>,
    nullified: Vec<bool>,
}

impl PerturbedDataset {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn into_data(self) -> Dataset {
        self.data
    }

    pub fn is_modified(&self, i: usize, j: usize) -> bool {
        self.modified[i * self.data.p() + j]
    }

    pub fn is_nullified(&self, i: usize) -> bool {
        self.nullified[i]
    }

    pub fn nullified_records(&self) -> Vec<usize> {
        (0..self.nullified.len()).filter(|&i| self.nullified[i]).collect()
    }

    pub fn modified_count(&self) -> usize {
        self.modified.iter().filter(|&&m| m).count()
    }
}

/// Perturb `d` using neighborhoods `ns`.
///
/// Cell `(i, j)` draws its coin from stream `(seed, Coin, i, j)` and its donor
/// from `(seed, Donor, i, j)`, so the output does not depend on scheduling.
/// Records with an empty neighborhood are released with every cell missing
/// whenever `q > 0`.
pub fn perturb(d: &Dataset, ns: &NeighborhoodSet, cfg: &RwnConfig) -> Result<PerturbedDataset> {
    if !(0.0..=1.0).contains(&cfg.q) {
        return Err(RwnError::config("q", format!("must be in [0, 1], got {}", cfg.q)));
    }
    if ns.n() != d.n() {
        return Err(RwnError::ShapeMismatch(format!(
            "neighborhoods cover {} records, dataset has {}",
            ns.n(),
            d.n()
        )));
    }
    let (n, p) = (d.n(), d.p());
    let q = cfg.q;
    let streams = Streams::new(cfg.seed);

    let rows: Vec<(Vec<Cell>, Vec<bool>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let neighbors = ns.neighbors(i);
            if q > 0.0 && neighbors.is_empty() {
                return (vec![Cell::Missing; p], vec![false; p], true);
            }
            let mut cells = d.row(i).to_vec();
            let mut flags = vec![false; p];
            if q > 0.0 {
                for j in 0..p {
                    let u: f64 = streams.stream(Domain::Coin, i as u64, j as u64).random();
                    if u < q {
                        let pick = streams
                            .stream(Domain::Donor, i as u64, j as u64)
                            .random_range(0..neighbors.len());
                        cells[j] = d.cell(neighbors[pick] as usize, j);
                        flags[j] = true;
                    }
                }
            }
            (cells, flags, false)
        })
        .collect();

    let mut cells = Vec::with_capacity(n * p);
    let mut modified = Vec::with_capacity(n * p);
    let mut nullified = Vec::with_capacity(n);
    for (c, m, z) in rows {
        cells.extend(c);
        modified.extend(m);
        nullified.push(z);
    }
    Ok(PerturbedDataset {
        data: d.with_cells(cells)?,
        modified,
        nullified,
    })
}

/// Build neighborhoods from `cfg` and perturb.
pub fn run(d: &Dataset, cfg: &RwnConfig) -> Result<(NeighborhoodSet, PerturbedDataset)> {
    cfg.validate()?;
    let spec = cfg.distance_spec(d)?;
    let ns = neighborhoods::build(&spec, &cfg.backend_spec()?, cfg.eps, cfg.k, cfg.seed)?;
    let out = perturb(d, &ns, cfg)?;
    Ok((ns, out))
}

/// True iff every modified cell came from a neighbor's same column, every
/// unmodified cell is the original, and only empty-neighborhood records were
/// nullified.
pub fn provenance_check(d: &Dataset, out: &PerturbedDataset, ns: &NeighborhoodSet) -> bool {
    let released = out.data();
    if released.n() != d.n() || released.p() != d.p() || ns.n() != d.n() || released.schema() != d.schema() {
        return false;
    }
    (0..d.n()).all(|i| {
        let neighbors = ns.neighbors(i);
        if out.is_nullified(i) {
            return neighbors.is_empty() && released.row(i).iter().all(Cell::is_missing);
        }
        (0..d.p()).all(|j| {
            let v = released.cell(i, j);
            if out.is_modified(i, j) {
                neighbors.iter().any(|&s| d.cell(s as usize, j).identical(&v))
            } else {
                d.cell(i, j).identical(&v)
            }
        })
    })
}

/// Sidecar summary of one perturbation.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub config: RwnConfig,
    pub records: usize,
    pub columns: usize,
    pub nullified: Vec<usize>,
    pub modified_cells: usize,
    pub distance_evaluations: u64,
    pub partition_evaluations: Vec<u64>,
}

impl PerturbationReport {
    pub fn new(cfg: &RwnConfig, ns: &NeighborhoodSet, out: &PerturbedDataset) -> Self {
        Self {
            config: cfg.clone(),
            records: out.data().n(),
            columns: out.data().p(),
            nullified: out.nullified_records(),
            modified_cells: out.modified_count(),
            distance_evaluations: ns.evaluations(),
            partition_evaluations: ns.partition_evaluations().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSchema, StandardizedView};
    use crate::neighborhoods::build_exact;

    fn small() -> Dataset {
        Dataset::from_numeric_rows(
            &["a", "b"],
            &[vec![0.0, 10.0], vec![1.0, 11.0], vec![5.0, 15.0], vec![6.0, 16.0]],
        )
        .unwrap()
    }

    #[test]
    fn q_zero_is_identity() {
        let d = small();
        let cfg = RwnConfig::new(0.0, 0, 0.0, 3);
        let ns = build_exact(&cfg.distance_spec(&d).unwrap(), 0.0, 0).unwrap();
        let out = perturb(&d, &ns, &cfg).unwrap();
        assert!(out.data().identical(&d));
        assert_eq!(out.modified_count(), 0);
        assert!(out.nullified_records().is_empty());
    }

    #[test]
    fn forced_single_donor() {
        let d = small();
        let cfg = RwnConfig::new(0.0, 1, 1.0, 8);
        let ns = build_exact(&DistanceSpec::new(StandardizedView::raw(&d)), 0.0, 1).unwrap();
        let out = perturb(&d, &ns, &cfg).unwrap();
        for i in 0..4 {
            let donor = ns.neighbors(i)[0] as usize;
            assert_eq!(out.data().row(i), d.row(donor));
        }
        assert_eq!(out.modified_count(), 8);
    }

    #[test]
    fn empty_neighborhood_nullifies() {
        let lonely = Dataset::from_numeric_rows(&["a", "b"], &[vec![0.0, 0.0], vec![9.0, 9.0]]).unwrap();
        let ns = build_exact(&DistanceSpec::new(StandardizedView::raw(&lonely)), 1.0, 0).unwrap();
        let cfg = RwnConfig::new(1.0, 0, 0.5, 1);
        let out = perturb(&lonely, &ns, &cfg).unwrap();
        assert_eq!(out.nullified_records(), vec![0, 1]);
        assert!(out.data().row(0).iter().all(Cell::is_missing));
        assert!(provenance_check(&lonely, &out, &ns));
    }

    #[test]
    fn shape_mismatch() {
        let d = small();
        let other = Dataset::from_numeric_rows(&["a", "b"], &[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ns = build_exact(&DistanceSpec::from_dataset(&other), 1.0, 1).unwrap();
        assert!(matches!(
            perturb(&d, &ns, &RwnConfig::default()),
            Err(RwnError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn provenance_detects_tampering() {
        let d = small();
        let cfg = RwnConfig::new(10.0, 1, 0.7, 4);
        let (ns, out) = run(&d, &cfg).unwrap();
        assert!(provenance_check(&d, &out, &ns));

        let mut cells = out.data().cells().to_vec();
        cells[3] = Cell::Numeric(-123.0);
        let tampered = PerturbedDataset {
            data: d.with_cells(cells).unwrap(),
            ..out.clone()
        };
        assert!(!provenance_check(&d, &tampered, &ns));

        let mut nullified = out.nullified.clone();
        nullified[0] = true;
        let mut cells = out.data().cells().to_vec();
        cells[0] = Cell::Missing;
        cells[1] = Cell::Missing;
        let fake_null = PerturbedDataset {
            data: d.with_cells(cells).unwrap(),
            nullified,
            modified: out.modified.clone(),
        };
        assert!(!provenance_check(&d, &fake_null, &ns));
    }

    #[test]
    fn duplicates_rather_than_swaps() {
        // every neighborhood holds the other two records, so with q = 1
        // records 1 and 2 may both copy 0.0 from record 0
        let d = Dataset::from_numeric_rows(&["x"], &[vec![0.0], vec![0.1], vec![0.15]]).unwrap();
        let mut found = false;
        for seed in 0..50 {
            let cfg = RwnConfig::new(0.0, 2, 1.0, seed);
            let (_, out) = run(&d, &cfg).unwrap();
            let zeros = (0..3).filter(|&i| out.data().cell(i, 0) == Cell::Numeric(0.0)).count();
            if zeros >= 2 {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RwnConfig::new(0.5, 5, 1.5, 0);
        assert!(matches!(cfg.validate(), Err(RwnError::Config { field: "q", .. })));
        cfg.q = 0.5;
        cfg.eps = -1.0;
        assert!(matches!(cfg.validate(), Err(RwnError::Config { field: "eps", .. })));
        cfg.eps = 0.5;
        cfg.backend = BackendKind::Pool;
        assert!(matches!(cfg.validate(), Err(RwnError::Config { field: "m", .. })));
        cfg.m = Some(3);
        assert!(cfg.validate().is_ok());
        cfg.backend = BackendKind::Partitioned;
        assert!(matches!(cfg.validate(), Err(RwnError::Config { field: "u", .. })));
        cfg.u = Some(2);
        cfg.inner = Some(BackendKind::PairSample);
        assert_eq!(
            cfg.backend_spec().unwrap(),
            Backend::Partitioned {
                u: 2,
                inner: Box::new(Backend::PairSample { m: 3 })
            }
        );
    }

    #[test]
    fn weights_by_name() {
        let d = small();
        let mut cfg = RwnConfig::default();
        cfg.weights.insert("b".into(), 0.0);
        assert_eq!(cfg.weight_vector(&d).unwrap(), vec![1.0, 0.0]);
        cfg.weights.insert("zzz".into(), 1.0);
        assert!(cfg.weight_vector(&d).is_err());
    }

    #[test]
    fn categorical_cells_are_copied_from_neighbors() {
        let schema = vec![
            ColumnSchema::numeric("x"),
            ColumnSchema::categorical("c", ["a", "b", "c"]),
        ];
        let cells = (0..30)
            .flat_map(|i| [Cell::Numeric(i as f64), Cell::Categorical((i % 3) as u32)])
            .collect();
        let d = Dataset::new(schema, cells).unwrap();
        let cfg = RwnConfig::new(0.3, 3, 1.0, 12);
        let (ns, out) = run(&d, &cfg).unwrap();
        assert!(provenance_check(&d, &out, &ns));
    }

    #[test]
    fn config_json_round_trip() {
        let json = r#"{"eps":0.5,"k":5,"q":1.0,"seed":42,"backend":"pair-sample","m":10}"#;
        let cfg: RwnConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.backend, BackendKind::PairSample);
        assert_eq!(cfg.m, Some(10));
        let back: RwnConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
