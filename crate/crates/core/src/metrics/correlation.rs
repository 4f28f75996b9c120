use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::Result;

use super::check_paired;

/// Pairwise-complete Pearson correlations of the numeric columns before and
/// after perturbation. Entries are `None` where fewer than two complete pairs
/// exist or a column has zero variance over them.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub columns: Vec<String>,
    pub original: Vec<Vec<Option<f64>>>,
    pub perturbed: Vec<Vec<Option<f64>>>,
    /// `perturbed - original`, defined where both are.
    pub delta: Vec<Vec<Option<f64>>>,
    /// Off-diagonal pairs (counted once) with both entries defined.
    pub compared_pairs: usize,
    /// Off-diagonal pairs whose correlations have strictly opposite signs.
    pub sign_flips: usize,
    pub mean_abs_delta: Option<f64>,
    pub max_abs_delta: Option<f64>,
}

impl CorrelationReport {
    /// Fraction of compared pairs keeping their sign.
    pub fn sign_agreement(&self) -> Option<f64> {
        (self.compared_pairs > 0).then(|| 1.0 - self.sign_flips as f64 / self.compared_pairs as f64)
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise-complete correlation matrix over `cols`.
pub fn correlation_matrix(d: &Dataset, cols: &[usize]) -> Vec<Vec<Option<f64>>> {
    let columns: Vec<Vec<Option<f64>>> = cols.iter().map(|&j| d.numeric_column(j)).collect();
    let k = cols.len();
    let mut m = vec![vec![None; k]; k];
    for a in 0..k {
        for b in a..k {
            let (x, y): (Vec<f64>, Vec<f64>) = columns[a]
                .iter()
                .zip(&columns[b])
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            let r = if a == b {
                pearson(&x, &y).map(|_| 1.0)
            } else {
                pearson(&x, &y)
            };
            m[a][b] = r;
            m[b][a] = r;
        }
    }
    m
}

pub fn correlation_report(orig: &Dataset, pert: &Dataset) -> Result<CorrelationReport> {
    check_paired(orig, pert)?;
    let cols = orig.numeric_columns();
    let original = correlation_matrix(orig, &cols);
    let perturbed = correlation_matrix(pert, &cols);
    let k = cols.len();
    let mut delta = vec![vec![None; k]; k];
    let (mut compared, mut flips, mut sum, mut max) = (0usize, 0usize, 0.0f64, None::<f64>);
    for a in 0..k {
        for b in 0..k {
            if let (Some(o), Some(p)) = (original[a][b], perturbed[a][b]) {
                delta[a][b] = Some(p - o);
                if a < b {
                    compared += 1;
                    flips += usize::from(o * p < 0.0);
                    let d = (p - o).abs();
                    sum += d;
                    max = Some(max.map_or(d, |m| m.max(d)));
                }
            }
        }
    }
    Ok(CorrelationReport {
        columns: cols.iter().map(|&j| orig.schema()[j].name.clone()).collect(),
        original,
        perturbed,
        delta,
        compared_pairs: compared,
        sign_flips: flips,
        mean_abs_delta: (compared > 0).then(|| sum / compared as f64),
        max_abs_delta: max,
    })
}
