use rand::seq::index;
use rayon::prelude::*;

use super::{select, BackendKind, NeighborhoodParams, NeighborhoodSet, Outcome};
use crate::distance::Metric;
use crate::error::{Result, RwnError};
use crate::rng::{Domain, Streams};

/// Neighbors drawn from a random pool of `m` records instead of the whole
/// dataset: at most `m·n` distance evaluations.
///
/// The pool is drawn once and shared unless `fresh_pool_per_point` is set,
/// in which case record `i` gets its own pool from stream `(seed, i)`.
pub fn build_pool<M: Metric>(
    metric: &M,
    eps: f64,
    k: usize,
    m: usize,
    fresh_pool_per_point: bool,
    seed: u64,
) -> Result<NeighborhoodSet> {
    super::check_rule(eps)?;
    let n = metric.len();
    let members: Vec<usize> = (0..n).collect();
    let streams = Streams::new(seed);
    let (outcomes, evals) = pool_outcomes(metric, &members, eps, k, m, fresh_pool_per_point, &streams, 0)?;
    Ok(NeighborhoodSet::assemble(
        n,
        outcomes,
        BackendKind::Pool,
        NeighborhoodParams {
            eps,
            k,
            m: Some(m),
            u: None,
        },
        vec![evals],
    ))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn pool_outcomes<M: Metric>(
    metric: &M,
    members: &[usize],
    eps: f64,
    k: usize,
    m: usize,
    fresh_pool_per_point: bool,
    streams: &Streams,
    stream_id: u64,
) -> Result<(Vec<(usize, Outcome)>, u64)> {
    let s = members.len();
    if m == 0 {
        return Err(RwnError::config("m", "pool size must be >= 1"));
    }
    if m > s {
        return Err(RwnError::config(
            "m",
            format!("pool size {m} exceeds the {s} records available"),
        ));
    }
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> {
        let mut pool: Vec<usize> = index::sample(rng, s, m).into_iter().map(|a| members[a]).collect();
        pool.sort_unstable();
        pool
    };
    let shared = (!fresh_pool_per_point).then(|| draw(&mut streams.stream(Domain::Pool, stream_id, 0)));

    let results: Vec<(usize, Outcome, u64)> = members
        .par_iter()
        .map(|&g| {
            let own;
            let pool = match &shared {
                Some(p) => p,
                None => {
                    own = draw(&mut streams.stream(Domain::Pool, g as u64, 1));
                    &own
                }
            };
            let cands: Vec<(f64, u32)> = pool
                .iter()
                .filter(|&&c| c != g)
                .map(|&c| (metric.between(g, c), c as u32))
                .collect();
            let evals = cands.len() as u64;
            (g, select(cands, eps, k), evals)
        })
        .collect();
    let evals = results.iter().map(|r| r.2).sum();
    Ok((results.into_iter().map(|(g, o, _)| (g, o)).collect(), evals))
}
