//! Per-record neighbor sets: the exact all-pairs build and three cheaper
//! variants (shared or per-record candidate pools, sampled pairs, and
//! partitioning).
//!
//! Every backend applies the same selection rule to whatever candidates it
//! sees: take the ε-ball if it is at least as large as the k-nearest set,
//! otherwise the k nearest (ties broken by smaller index).

mod exact;
mod pairs;
mod partition;
mod pool;
pub mod rank;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distance::Metric;
use crate::error::{Result, RwnError};
use crate::rng::Streams;

pub use exact::{build_exact, PairwiseDistances};
pub use pairs::{build_from_graph, sample_pairs, DistanceGraph, Edge, PairSample};
pub use partition::{build_partitioned, partition_members};
pub use pool::build_pool;
pub use rank::{decode_rank, encode_rank, pair_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Exact,
    Pool,
    PairSample,
    Partitioned,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Exact => "exact",
            BackendKind::Pool => "pool",
            BackendKind::PairSample => "pair-sample",
            BackendKind::Partitioned => "partitioned",
        })
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "exact" => BackendKind::Exact,
            "pool" => BackendKind::Pool,
            "pair-sample" => BackendKind::PairSample,
            "partitioned" => BackendKind::Partitioned,
            other => {
                return Err(format!(
                    "unknown backend `{other}` (expected exact, pool, pair-sample or partitioned)"
                ))
            }
        })
    }
}

/// A fully parameterized backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Exact,
    Pool { m: usize, fresh_pool_per_point: bool },
    PairSample { m: usize },
    Partitioned { u: usize, inner: Box<Backend> },
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Exact => BackendKind::Exact,
            Backend::Pool { .. } => BackendKind::Pool,
            Backend::PairSample { .. } => BackendKind::PairSample,
            Backend::Partitioned { .. } => BackendKind::Partitioned,
        }
    }
}

/// Which of the two candidate sets won for a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    EpsilonBall,
    NearestK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborhoodParams {
    pub eps: f64,
    pub k: usize,
    pub m: Option<usize>,
    pub u: Option<usize>,
}

/// Result of selecting among one record's candidates.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Outcome {
    pub set: Vec<u32>,
    pub selection: Selection,
    pub min_distance: Option<f64>,
}

impl Outcome {
    fn empty() -> Self {
        Self {
            set: Vec::new(),
            selection: Selection::EpsilonBall,
            min_distance: None,
        }
    }
}

fn by_distance_then_index(a: &(f64, u32), b: &(f64, u32)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Apply the ε/k rule to `(distance, index)` candidates. The record itself
/// must not be among them.
pub(crate) fn select(mut cands: Vec<(f64, u32)>, eps: f64, k: usize) -> Outcome {
    if cands.is_empty() {
        return Outcome::empty();
    }
    let min_distance = cands.iter().map(|c| c.0).min_by(f64::total_cmp);
    let ball = cands.iter().filter(|c| c.0 <= eps).count();
    let k_eff = k.min(cands.len());
    let (mut set, selection): (Vec<u32>, _) = if ball >= k_eff {
        (
            cands.iter().filter(|c| c.0 <= eps).map(|c| c.1).collect(),
            Selection::EpsilonBall,
        )
    } else {
        cands.select_nth_unstable_by(k_eff - 1, by_distance_then_index);
        cands.truncate(k_eff);
        (cands.into_iter().map(|c| c.1).collect(), Selection::NearestK)
    };
    set.sort_unstable();
    Outcome {
        set,
        selection,
        min_distance,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSet {
    sets: Vec<Vec<u32>>,
    min_distance: Vec<Option<f64>>,
    selection: Vec<Selection>,
    backend: BackendKind,
    params: NeighborhoodParams,
    evaluations: u64,
    partition_evaluations: Vec<u64>,
}

impl NeighborhoodSet {
    pub(crate) fn assemble(
        n: usize,
        outcomes: impl IntoIterator<Item = (usize, Outcome)>,
        backend: BackendKind,
        params: NeighborhoodParams,
        partition_evaluations: Vec<u64>,
    ) -> Self {
        let mut sets = vec![Vec::new(); n];
        let mut min_distance = vec![None; n];
        let mut selection = vec![Selection::EpsilonBall; n];
        for (i, o) in outcomes {
            sets[i] = o.set;
            min_distance[i] = o.min_distance;
            selection[i] = o.selection;
        }
        Self {
            sets,
            min_distance,
            selection,
            backend,
            params,
            evaluations: partition_evaluations.iter().sum(),
            partition_evaluations,
        }
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    /// Neighbor indices of record `i`, ascending, never containing `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.sets[i]
    }

    pub fn size(&self, i: usize) -> usize {
        self.sets[i].len()
    }

    /// Distance to the nearest candidate examined for record `i` (the true
    /// nearest neighbor under the exact backend).
    pub fn min_distance(&self, i: usize) -> Option<f64> {
        self.min_distance[i]
    }

    pub fn selection(&self, i: usize) -> Selection {
        self.selection[i]
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    pub fn params(&self) -> NeighborhoodParams {
        self.params
    }

    /// Exact number of distance evaluations performed by this build.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Evaluations per partition; a single entry for unpartitioned backends.
    pub fn partition_evaluations(&self) -> &[u64] {
        &self.partition_evaluations
    }

    pub fn empty_records(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.sets[i].is_empty()).collect()
    }
}

/// Number of distance evaluations performed by the build that produced `ns`.
pub fn pairwise_count(ns: &NeighborhoodSet) -> u64 {
    ns.evaluations()
}

/// Build neighborhoods with any backend.
pub fn build<M: Metric>(metric: &M, backend: &Backend, eps: f64, k: usize, seed: u64) -> Result<NeighborhoodSet> {
    check_rule(eps)?;
    match backend {
        Backend::Exact => build_exact(metric, eps, k),
        Backend::Pool {
            m,
            fresh_pool_per_point,
        } => build_pool(metric, eps, k, *m, *fresh_pool_per_point, seed),
        Backend::PairSample { m } => {
            let sample = sample_pairs(metric.len(), *m, seed)?;
            let graph = DistanceGraph::from_sample(metric, &sample)?;
            Ok(build_from_graph(&graph, eps, k))
        }
        Backend::Partitioned { u, inner } => build_partitioned(metric, *u, inner, eps, k, seed),
    }
}

pub(crate) fn check_rule(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        return Err(RwnError::config("eps", format!("must be >= 0, got {eps}")));
    }
    Ok(())
}

/// Run one backend over the records `members` (global indices), which is the
/// whole dataset or one partition. `stream_id` separates random streams of
/// different partitions.
pub(crate) fn run_on_members<M: Metric>(
    metric: &M,
    members: &[usize],
    backend: &Backend,
    eps: f64,
    k: usize,
    streams: &Streams,
    stream_id: u64,
) -> Result<(Vec<(usize, Outcome)>, u64)> {
    match backend {
        Backend::Exact => {
            let d = PairwiseDistances::over(metric, members.to_vec());
            let evals = d.evaluations();
            Ok((d.outcomes(eps, k), evals))
        }
        Backend::Pool {
            m,
            fresh_pool_per_point,
        } => pool::pool_outcomes(metric, members, eps, k, *m, *fresh_pool_per_point, streams, stream_id),
        Backend::PairSample { m } => {
            let sample = pairs::sample_pairs_with(members.len(), *m, streams, stream_id)?;
            let graph = DistanceGraph::over(metric, members, &sample);
            let evals = graph.edges().len() as u64;
            let outcomes = members
                .iter()
                .map(|&g| (g, pairs::graph_outcome(&graph, g, eps, k)))
                .collect();
            Ok((outcomes, evals))
        }
        Backend::Partitioned { .. } => Err(RwnError::config("inner", "partitioned backends cannot be nested")),
    }
}

/// One row of the minimum-distance diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub record_index: usize,
    pub min_distance: Option<f64>,
    pub neighborhood_size: usize,
}

/// Nearest-candidate distance and neighborhood size per record.
pub fn min_distance_profile(ns: &NeighborhoodSet) -> Result<Vec<ProfileRow>> {
    if ns.n() < 2 {
        return Err(RwnError::InsufficientData(
            "the minimum-distance profile needs at least 2 records".into(),
        ));
    }
    Ok((0..ns.n())
        .map(|i| ProfileRow {
            record_index: i,
            min_distance: ns.min_distance(i),
            neighborhood_size: ns.size(i),
        })
        .collect())
}

/// Profile computed from a full distance specification with the exact backend.
pub fn exact_profile<M: Metric>(metric: &M, eps: f64, k: usize) -> Result<Vec<ProfileRow>> {
    if metric.len() < 2 {
        return Err(RwnError::InsufficientData(
            "the minimum-distance profile needs at least 2 records".into(),
        ));
    }
    min_distance_profile(&build_exact(metric, eps, k)?)
}

/// CSV with header `record_index,min_distance,neighborhood_size`.
pub fn write_profile<W: Write>(rows: &[ProfileRow], writer: W, missing: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["record_index", "min_distance", "neighborhood_size"])?;
    for r in rows {
        let d = r.min_distance.map_or_else(|| missing.to_string(), |d| format!("{d}"));
        w.write_record([r.record_index.to_string(), d, r.neighborhood_size.to_string()])?;
    }
    w.flush().map_err(|source| RwnError::Io {
        path: "<profile output>".into(),
        source,
    })
}

pub fn write_profile_file(rows: &[ProfileRow], path: impl AsRef<Path>, missing: &str) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| RwnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_profile(rows, std::io::BufWriter::new(file), missing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(ds: &[f64]) -> Vec<(f64, u32)> {
        ds.iter().enumerate().map(|(i, &d)| (d, i as u32)).collect()
    }

    #[test]
    fn ball_wins_when_larger() {
        let o = select(cands(&[0.1, 0.2, 0.3, 5.0]), 0.5, 2);
        assert_eq!(o.set, vec![0, 1, 2]);
        assert_eq!(o.selection, Selection::EpsilonBall);
        assert_eq!(o.min_distance, Some(0.1));
    }

    #[test]
    fn knn_wins_when_ball_smaller() {
        let o = select(cands(&[3.0, 0.2, 2.0, 5.0]), 0.5, 3);
        assert_eq!(o.set, vec![0, 1, 2]);
        assert_eq!(o.selection, Selection::NearestK);
    }

    #[test]
    fn equal_sizes_use_ball() {
        let o = select(cands(&[0.1, 0.9]), 0.5, 1);
        assert_eq!(o.set, vec![0]);
        assert_eq!(o.selection, Selection::EpsilonBall);
    }

    #[test]
    fn knn_ties_prefer_smaller_index() {
        let o = select(vec![(1.0, 7), (1.0, 3), (1.0, 5)], 0.0, 2);
        assert_eq!(o.set, vec![3, 5]);
    }

    #[test]
    fn k_beyond_candidates_truncates() {
        let o = select(cands(&[4.0, 2.0]), 0.0, 10);
        assert_eq!(o.set, vec![0, 1]);
    }

    #[test]
    fn no_candidates() {
        assert_eq!(select(Vec::new(), 1.0, 3), Outcome::empty());
    }
}
