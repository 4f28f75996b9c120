use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{run_on_members, Backend, BackendKind, NeighborhoodParams, NeighborhoodSet};
use crate::distance::Metric;
use crate::error::{Result, RwnError};
use crate::rng::{Domain, Streams};

/// Seeded uniform assignment of `0..n` to `u` partitions of size `⌊n/u⌋` or
/// `⌈n/u⌉`. Members of each partition are returned in ascending order.
pub fn partition_members(n: usize, u: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if u == 0 || u > n {
        return Err(RwnError::config("u", format!("must be in 1..={n}, got {u}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut Streams::new(seed).stream(Domain::Partition, 0, 0));
    let (base, extra) = (n / u, n % u);
    let mut parts = Vec::with_capacity(u);
    let mut start = 0;
    for p in 0..u {
        let len = base + usize::from(p < extra);
        let mut members = order[start..start + len].to_vec();
        members.sort_unstable();
        parts.push(members);
        start += len;
    }
    Ok(parts)
}

/// Split the records into `u` random partitions and run `inner` inside each
/// one. Neighbors never cross partitions; indices stay global.
pub fn build_partitioned<M: Metric>(
    metric: &M,
    u: usize,
    inner: &Backend,
    eps: f64,
    k: usize,
    seed: u64,
) -> Result<NeighborhoodSet> {
    super::check_rule(eps)?;
    if matches!(inner, Backend::Partitioned { .. }) {
        return Err(RwnError::config("inner", "partitioned backends cannot be nested"));
    }
    let n = metric.len();
    let parts = partition_members(n, u, seed)?;
    if let Some((partition, p)) = parts.iter().enumerate().find(|(_, p)| p.len() < 2) {
        return Err(RwnError::PartitionTooSmall {
            partition,
            size: p.len(),
        });
    }
    let streams = Streams::new(seed);
    let results = parts
        .par_iter()
        .enumerate()
        .map(|(idx, members)| run_on_members(metric, members, inner, eps, k, &streams, idx as u64))
        .collect::<Result<Vec<_>>>()?;

    let m = match inner {
        Backend::Pool { m, .. } | Backend::PairSample { m } => Some(*m),
        _ => None,
    };
    let per_partition: Vec<u64> = results.iter().map(|r| r.1).collect();
    Ok(NeighborhoodSet::assemble(
        n,
        results.into_iter().flat_map(|r| r.0),
        BackendKind::Partitioned,
        NeighborhoodParams { eps, k, m, u: Some(u) },
        per_partition,
    ))
}
