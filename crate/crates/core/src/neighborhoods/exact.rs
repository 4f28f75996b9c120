use rayon::prelude::*;

use super::{select, BackendKind, NeighborhoodParams, NeighborhoodSet, Outcome};
use crate::distance::Metric;
use crate::error::{Result, RwnError};

/// All pairwise distances among a set of records, each evaluated once and
/// stored in a condensed strict-lower-triangle buffer.
///
/// Memory is `8·s(s−1)/2` bytes for `s` members.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    members: Vec<usize>,
    dist: Vec<f64>,
}

impl PairwiseDistances {
    pub fn compute<M: Metric>(metric: &M) -> Self {
        Self::over(metric, (0..metric.len()).collect())
    }

    /// Distances among `members` (global record indices).
    pub fn over<M: Metric>(metric: &M, members: Vec<usize>) -> Self {
        let s = members.len();
        let mut dist = vec![0.0; s * s.saturating_sub(1) / 2];
        let mut columns: Vec<&mut [f64]> = Vec::with_capacity(s);
        let mut rest = dist.as_mut_slice();
        for b in 0..s {
            let (col, tail) = rest.split_at_mut(b);
            columns.push(col);
            rest = tail;
        }
        columns.into_par_iter().enumerate().for_each(|(b, col)| {
            let gb = members[b];
            for (a, slot) in col.iter_mut().enumerate() {
                *slot = metric.between(members[a], gb);
            }
        });
        Self { members, dist }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Number of distances evaluated to fill the buffer.
    pub fn evaluations(&self) -> u64 {
        self.dist.len() as u64
    }

    /// Distance between local positions `a` and `b`.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.dist[b * (b - 1) / 2 + a],
            std::cmp::Ordering::Greater => self.dist[a * (a - 1) / 2 + b],
        }
    }

    pub(crate) fn outcomes(&self, eps: f64, k: usize) -> Vec<(usize, Outcome)> {
        let s = self.len();
        (0..s)
            .into_par_iter()
            .map(|a| {
                let cands = (0..s)
                    .filter(|&b| b != a)
                    .map(|b| (self.get(a, b), self.members[b] as u32))
                    .collect();
                (self.members[a], select(cands, eps, k))
            })
            .collect()
    }

    /// Neighborhoods for any `(eps, k)` without recomputing distances. Only
    /// meaningful when the members are the whole dataset `0..n`.
    pub fn neighborhoods(&self, eps: f64, k: usize) -> Result<NeighborhoodSet> {
        super::check_rule(eps)?;
        check_k(k, self.len())?;
        let n = self.members.iter().max().map_or(0, |m| m + 1);
        Ok(NeighborhoodSet::assemble(
            n,
            self.outcomes(eps, k),
            BackendKind::Exact,
            NeighborhoodParams {
                eps,
                k,
                m: None,
                u: None,
            },
            vec![self.evaluations()],
        ))
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k > n.saturating_sub(1) {
        return Err(RwnError::config(
            "k",
            format!("{k} exceeds n - 1 = {}", n.saturating_sub(1)),
        ));
    }
    Ok(())
}

/// Larger of the ε-ball and the k-nearest set for every record, from all
/// n(n−1)/2 distances.
pub fn build_exact<M: Metric>(metric: &M, eps: f64, k: usize) -> Result<NeighborhoodSet> {
    super::check_rule(eps)?;
    check_k(k, metric.len())?;
    PairwiseDistances::compute(metric).neighborhoods(eps, k)
}
