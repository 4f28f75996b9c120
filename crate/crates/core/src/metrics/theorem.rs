//! Monte Carlo check that, as the neighborhood radius shrinks, the released
//! pair `(U, V)` of a record's two perturbed values has the joint
//! distribution of the original data.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{standardize, Cell, Dataset};
use crate::distance::DistanceSpec;
use crate::engine::{perturb, RwnConfig};
use crate::error::{Result, RwnError};
use crate::neighborhoods::PairwiseDistances;
use crate::rng::{derive_seed, Domain, Streams};
use crate::synth::bivariate_normal;

use super::correlation::pearson;
use super::quantile_sorted;

/// What is applied to the synthetic data at each schedule step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    /// RWN with `q = 1` at the step's ε.
    Rwn,
    /// Each column permuted independently over the whole dataset. Keeps the
    /// marginals, destroys the dependence; a negative control.
    ColumnPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremCheckConfig {
    pub rho: f64,
    pub n: usize,
    /// Decreasing radii in standardized units.
    pub eps_schedule: Vec<f64>,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
    /// Bound on the mean joint-CDF gap at the last (smallest) ε.
    pub tolerance: f64,
    /// Quantile grid is `grid × grid`.
    pub grid: usize,
    /// Largest least-squares slope of the mean gap per schedule step still
    /// counted as a decreasing trend.
    pub trend_slack: f64,
    pub mechanism: Mechanism,
}

impl Default for TheoremCheckConfig {
    fn default() -> Self {
        Self {
            rho: 0.7,
            n: 5000,
            eps_schedule: vec![1.0, 0.5, 0.25, 0.1],
            k: 3,
            reps: 25,
            seed: 0,
            tolerance: 0.03,
            grid: 10,
            trend_slack: 0.002,
            mechanism: Mechanism::Rwn,
        }
    }
}

impl TheoremCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho.is_nan() || self.rho.abs() >= 1.0 {
            return Err(RwnError::config("rho", format!("{} must satisfy |rho| < 1", self.rho)));
        }
        if self.n < 100 {
            return Err(RwnError::config("n", format!("{} is below the minimum of 100", self.n)));
        }
        if self.eps_schedule.len() < 3 {
            return Err(RwnError::config("eps_schedule", "needs at least 3 values"));
        }
        if self.eps_schedule.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(RwnError::config("eps_schedule", "values must be finite and >= 0"));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(RwnError::config("k", format!("{} must be in 1..n", self.k)));
        }
        if self.reps == 0 {
            return Err(RwnError::config("reps", "must be >= 1"));
        }
        if self.grid == 0 {
            return Err(RwnError::config("grid", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremStep {
    pub eps: f64,
    /// Per replication: max over the grid of |F′(a,b) − F(a,b)|.
    pub joint_gaps: Vec<f64>,
    pub marginal_gaps: Vec<f64>,
    pub correlations: Vec<f64>,
    pub mean_joint_gap: f64,
    pub mean_marginal_gap: f64,
    pub mean_correlation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub config: TheoremCheckConfig,
    pub steps: Vec<TheoremStep>,
    pub original_mean_correlation: f64,
    /// Least-squares slope of the mean joint gap against step index.
    pub trend_slope: f64,
    pub trend_ok: bool,
    pub final_ok: bool,
    pub passed: bool,
}

impl TheoremCheck {
    pub fn final_step(&self) -> &TheoremStep {
        self.steps.last().expect("schedule has at least 3 steps")
    }
}

/// Type-7 quantiles of `values` at probabilities `i/(grid+1)`, `i = 1..=grid`.
pub fn quantile_grid(values: &[f64], grid: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (1..=grid)
        .map(|i| quantile_sorted(&v, i as f64 / (grid + 1) as f64))
        .collect()
}

fn joint_cdf(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points.iter().filter(|&&(x, y)| x <= a && y <= b).count() as f64 / points.len() as f64
}

/// Max over the grid `xs × ys` of the absolute difference between the two
/// empirical joint CDFs.
pub fn cdf_gap(orig: &[(f64, f64)], pert: &[(f64, f64)], xs: &[f64], ys: &[f64]) -> f64 {
    let mut gap: f64 = 0.0;
    for &a in xs {
        for &b in ys {
            gap = gap.max((joint_cdf(orig, a, b) - joint_cdf(pert, a, b)).abs());
        }
    }
    gap
}

/// Same statistic for each marginal separately; the larger of the two.
pub fn marginal_gap(orig: &[(f64, f64)], pert: &[(f64, f64)], xs: &[f64], ys: &[f64]) -> f64 {
    let inf = f64::INFINITY;
    let gx = cdf_gap(orig, pert, xs, &[inf]);
    let gy = cdf_gap(orig, pert, &[inf], ys);
    gx.max(gy)
}

fn pairs(d: &Dataset) -> Vec<(f64, f64)> {
    (0..d.n())
        .filter_map(|i| Some((d.cell(i, 0).as_f64()?, d.cell(i, 1).as_f64()?)))
        .collect()
}

fn correlation(p: &[(f64, f64)]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = p.iter().copied().unzip();
    pearson(&x, &y).unwrap_or(0.0)
}

fn permute_columns(d: &Dataset, seed: u64) -> Dataset {
    let streams = Streams::new(seed);
    let mut cols: Vec<Vec<Cell>> = (0..d.p()).map(|j| (0..d.n()).map(|i| d.cell(i, j)).collect()).collect();
    for (j, col) in cols.iter_mut().enumerate() {
        col.shuffle(&mut streams.stream(Domain::Synthetic, 100 + j as u64, 0));
    }
    let cells = (0..d.n()).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
    d.with_cells(cells).expect("same shape")
}

struct RepResult {
    original_corr: f64,
    steps: Vec<(f64, f64, f64)>,
}

fn replicate(cfg: &TheoremCheckConfig, rep: usize) -> Result<RepResult> {
    let data_seed = derive_seed(cfg.seed, Domain::Replication, rep as u64);
    let d = bivariate_normal(cfg.n, cfg.rho, data_seed);
    let orig = pairs(&d);
    let (xs, ys): (Vec<f64>, Vec<f64>) = orig.iter().copied().unzip();
    let (gx, gy) = (quantile_grid(&xs, cfg.grid), quantile_grid(&ys, cfg.grid));
    let distances = match cfg.mechanism {
        Mechanism::Rwn => Some(PairwiseDistances::compute(&DistanceSpec::new(standardize(&d)))),
        Mechanism::ColumnPermutation => None,
    };
    let steps = cfg
        .eps_schedule
        .iter()
        .enumerate()
        .map(|(s, &eps)| {
            let seed = derive_seed(data_seed, Domain::Replication, s as u64 + 1);
            let released = match &distances {
                Some(pd) => {
                    let ns = pd.neighborhoods(eps, cfg.k)?;
                    perturb(&d, &ns, &RwnConfig::new(eps, cfg.k, 1.0, seed))?.into_data()
                }
                None => permute_columns(&d, seed),
            };
            let p = pairs(&released);
            Ok((
                cdf_gap(&orig, &p, &gx, &gy),
                marginal_gap(&orig, &p, &gx, &gy),
                correlation(&p),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RepResult {
        original_corr: correlation(&orig),
        steps,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Run the check. Replications run in parallel; each draws its data and
/// perturbation seeds from its own index, so the result does not depend on
/// the number of worker threads.
pub fn theorem_check(cfg: &TheoremCheckConfig) -> Result<TheoremCheck> {
    cfg.validate()?;
    let reps = (0..cfg.reps)
        .into_par_iter()
        .map(|r| replicate(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<TheoremStep> = cfg
        .eps_schedule
        .iter()
        .enumerate()
        .map(|(s, &eps)| {
            let joint_gaps: Vec<f64> = reps.iter().map(|r| r.steps[s].0).collect();
            let marginal_gaps: Vec<f64> = reps.iter().map(|r| r.steps[s].1).collect();
            let correlations: Vec<f64> = reps.iter().map(|r| r.steps[s].2).collect();
            TheoremStep {
                eps,
                mean_joint_gap: mean(&joint_gaps),
                mean_marginal_gap: mean(&marginal_gaps),
                mean_correlation: mean(&correlations),
                joint_gaps,
                marginal_gaps,
                correlations,
            }
        })
        .collect();

    let ys: Vec<f64> = steps.iter().map(|s| s.mean_joint_gap).collect();
    let xbar = (ys.len() - 1) as f64 / 2.0;
    let ybar = mean(&ys);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in ys.iter().enumerate() {
        sxy += (x as f64 - xbar) * (y - ybar);
        sxx += (x as f64 - xbar).powi(2);
    }
    let trend_slope = sxy / sxx;
    let trend_ok = trend_slope <= cfg.trend_slack;
    let final_ok = *ys.last().expect("validated length") <= cfg.tolerance;
    Ok(TheoremCheck {
        config: cfg.clone(),
        original_mean_correlation: mean(&reps.iter().map(|r| r.original_corr).collect::<Vec<_>>()),
        steps,
        trend_slope,
        trend_ok,
        final_ok,
        passed: trend_ok && final_ok,
    })
}
