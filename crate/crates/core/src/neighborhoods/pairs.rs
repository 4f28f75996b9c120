use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rank::{decode_rank, pair_count};
use super::{select, BackendKind, NeighborhoodParams, NeighborhoodSet, Outcome};
use crate::distance::Metric;
use crate::error::{Result, RwnError};
use crate::rng::{Domain, Streams};

/// A uniform sample of distinct pairs `1 <= i < j <= n`, drawn as ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSample {
    n: usize,
    ranks: Vec<u64>,
}

impl PairSample {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of sampled pairs, `⌈n·m/2⌉`.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Sampled ranks in ascending order.
    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    /// Decoded 1-based pairs, in rank order.
    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.ranks.iter().map(|&r| decode_rank(r))
    }
}

/// Draw `⌈n·m/2⌉` distinct pair ranks uniformly from `[1, n(n−1)/2]`, so
/// that each record is incident to `m` sampled pairs on average.
pub fn sample_pairs(n: usize, m: usize, seed: u64) -> Result<PairSample> {
    sample_pairs_with(n, m, &Streams::new(seed), 0)
}

pub(crate) fn sample_pairs_with(n: usize, m: usize, streams: &Streams, stream_id: u64) -> Result<PairSample> {
    if n < 2 {
        return Err(RwnError::InsufficientData(format!(
            "pair sampling needs at least 2 records, got {n}"
        )));
    }
    if m == 0 {
        return Err(RwnError::config("m", "sample size per record must be >= 1"));
    }
    let total = pair_count(n as u64);
    let wanted = (n as u64 * m as u64).div_ceil(2);
    if wanted > total {
        return Err(RwnError::TooManyPairs {
            requested: wanted,
            total,
        });
    }
    let mut rng = streams.stream(Domain::PairRanks, stream_id, 0);
    let mut ranks = draw_distinct(&mut rng, total, wanted as usize);
    ranks.sort_unstable();
    Ok(PairSample { n, ranks })
}

/// `count` distinct integers uniform over `[1, total]`.
///
/// Sparse requests redraw on collision; dense ones use Floyd's algorithm,
/// which needs exactly `count` draws.
fn draw_distinct(rng: &mut ChaCha8Rng, total: u64, count: usize) -> Vec<u64> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    if (count as u64).saturating_mul(2) <= total {
        while out.len() < count {
            let r = rng.random_range(1..=total);
            if seen.insert(r) {
                out.push(r);
            }
        }
    } else {
        for upper in (total - count as u64 + 1)..=total {
            let t = rng.random_range(1..=upper);
            let pick = if seen.contains(&t) { upper } else { t };
            seen.insert(pick);
            out.push(pick);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Undirected graph whose edges are the sampled pairs, each carrying its
/// distance. Nodes are global record indices.
#[derive(Debug, Clone)]
pub struct DistanceGraph {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl DistanceGraph {
    pub fn from_sample<M: Metric>(metric: &M, sample: &PairSample) -> Result<Self> {
        if sample.n() != metric.len() {
            return Err(RwnError::ShapeMismatch(format!(
                "pair sample over {} records, dataset has {}",
                sample.n(),
                metric.len()
            )));
        }
        let members: Vec<usize> = (0..metric.len()).collect();
        Ok(Self::over(metric, &members, sample))
    }

    /// Graph over a subset: sampled pair `(a, b)` joins `members[a-1]` and
    /// `members[b-1]`.
    pub(crate) fn over<M: Metric>(metric: &M, members: &[usize], sample: &PairSample) -> Self {
        use rayon::prelude::*;
        let edges: Vec<Edge> = sample
            .ranks()
            .par_iter()
            .map(|&r| {
                let (a, b) = decode_rank(r);
                let (i, j) = (members[a as usize - 1], members[b as usize - 1]);
                Edge {
                    i,
                    j,
                    distance: metric.between(i, j),
                }
            })
            .collect();
        let mut adjacency = vec![Vec::new(); metric.len()];
        for e in &edges {
            adjacency[e.i].push((e.j as u32, e.distance));
            adjacency[e.j].push((e.i as u32, e.distance));
        }
        Self { edges, adjacency }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, distance)` for every edge incident to `i`.
    pub fn incident(&self, i: usize) -> &[(u32, f64)] {
        &self.adjacency[i]
    }
}

pub(crate) fn graph_outcome(g: &DistanceGraph, i: usize, eps: f64, k: usize) -> Outcome {
    let cands = g.incident(i).iter().map(|&(j, d)| (d, j)).collect();
    select(cands, eps, k)
}

/// Apply the ε/k rule to each record's sampled edges only. Records without
/// incident edges get an empty neighborhood.
pub fn build_from_graph(g: &DistanceGraph, eps: f64, k: usize) -> NeighborhoodSet {
    use rayon::prelude::*;
    let outcomes: Vec<(usize, Outcome)> = (0..g.n())
        .into_par_iter()
        .map(|i| (i, graph_outcome(g, i, eps, k)))
        .collect();
    let n_s = g.edges().len();
    let m = if g.n() == 0 { 0 } else { (2 * n_s).div_ceil(g.n()) };
    NeighborhoodSet::assemble(
        g.n(),
        outcomes,
        BackendKind::PairSample,
        NeighborhoodParams {
            eps,
            k,
            m: Some(m),
            u: None,
        },
        vec![n_s as u64],
    )
}
