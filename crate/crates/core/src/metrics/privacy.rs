use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{standardize, Dataset, StandardizedView};
use crate::distance::{DistanceSpec, Metric};
use crate::error::Result;

use super::{check_paired, Quartiles};

/// Mahalanobis distance of each record from its dataset's centroid.
#[derive(Debug, Clone, Serialize)]
pub struct Mahalanobis {
    /// `None` for records with a missing numeric cell.
    pub distances: Vec<Option<f64>>,
    /// Complete rows used for the mean and covariance.
    pub complete_rows: usize,
    /// Set when the covariance was singular (or too few rows to estimate
    /// it) and its Moore-Penrose pseudo-inverse was used instead.
    pub pseudo_inverse: bool,
}

impl Mahalanobis {
    pub fn max(&self) -> Option<f64> {
        self.distances.iter().flatten().copied().reduce(f64::max)
    }
}

/// Distances over the numeric columns, against the dataset's own sample mean
/// and covariance estimated from complete rows.
pub fn mahalanobis(d: &Dataset) -> Mahalanobis {
    let cols = d.numeric_columns();
    let p = cols.len();
    let rows: Vec<Vec<f64>> = (0..d.n())
        .filter_map(|i| {
            cols.iter()
                .map(|&j| d.cell(i, j).as_f64())
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    let complete: Vec<Option<Vec<f64>>> = (0..d.n())
        .map(|i| cols.iter().map(|&j| d.cell(i, j).as_f64()).collect())
        .collect();
    let m = rows.len();
    if p == 0 || m == 0 {
        return Mahalanobis {
            distances: vec![None; d.n()],
            complete_rows: m,
            pseudo_inverse: false,
        };
    }
    let mean = DVector::from_fn(p, |c, _| rows.iter().map(|r| r[c]).sum::<f64>() / m as f64);
    let centered = DMatrix::from_fn(m, p, |r, c| rows[r][c] - mean[c]);
    let denom = (m.max(2) - 1) as f64;
    let cov = centered.transpose() * &centered / denom;

    let scale = (0..p).map(|c| cov[(c, c)].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut pseudo_inverse = m < p + 1;
    let inverse = if pseudo_inverse {
        None
    } else {
        cov.clone()
            .cholesky()
            .filter(|ch| ch.l().diagonal().iter().all(|&v| v * v > tol))
            .map(|ch| ch.inverse())
    };
    let inverse = inverse.unwrap_or_else(|| {
        pseudo_inverse = true;
        cov.clone().pseudo_inverse(tol).expect("tolerance is nonnegative")
    });

    let distances = complete
        .into_iter()
        .map(|row| {
            row.map(|r| {
                let x = DVector::from_fn(p, |c, _| r[c] - mean[c]);
                (x.transpose() * &inverse * &x)[(0, 0)].max(0.0).sqrt()
            })
        })
        .collect();
    Mahalanobis {
        distances,
        complete_rows: m,
        pseudo_inverse,
    }
}

/// Distance from each record to its nearest other record. Records with every
/// cell missing have no position and get `None`; they are also skipped as
/// candidates.
pub fn min_distances(spec: &DistanceSpec) -> Vec<Option<f64>> {
    let view = spec.view();
    let n = spec.len();
    let present: Vec<bool> = (0..n)
        .map(|i| (0..view.p()).any(|j| view.value(i, j).is_some()))
        .collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            if !present[i] {
                return None;
            }
            (0..n)
                .filter(|&j| j != i && present[j])
                .map(|j| spec.between(i, j))
                .reduce(f64::min)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PrivacyReport {
    pub original_mahalanobis: Mahalanobis,
    pub perturbed_mahalanobis: Mahalanobis,
    pub original_min_distance: Vec<Option<f64>>,
    pub perturbed_min_distance: Vec<Option<f64>>,
    pub original_min_distance_quartiles: Option<Quartiles>,
    pub perturbed_min_distance_quartiles: Option<Quartiles>,
    /// Released rows equal, cell for cell, to their originals.
    pub identical_row_fraction: f64,
    /// Distance from each released row to the row it was derived from;
    /// `None` for nullified rows.
    pub distance_to_original: Vec<Option<f64>>,
}

pub fn privacy_report(orig: &Dataset, pert: &Dataset) -> Result<PrivacyReport> {
    check_paired(orig, pert)?;
    let orig_view = standardize(orig);
    let pert_view = StandardizedView::with_scaling(pert, orig_view.scaling().to_vec())?;
    let orig_spec = DistanceSpec::new(orig_view);
    let pert_spec = DistanceSpec::new(pert_view);

    let original_min_distance = min_distances(&orig_spec);
    let perturbed_min_distance = min_distances(&pert_spec);
    let identical = (0..orig.n())
        .filter(|&i| orig.row(i).iter().zip(pert.row(i)).all(|(a, b)| a.identical(b)))
        .count();
    let distance_to_original = (0..orig.n())
        .map(|i| {
            let nullified = pert.row(i).iter().all(|c| c.is_missing()) && orig.p() > 0;
            (!nullified).then(|| orig_spec.cross(i, pert_spec.view(), i))
        })
        .collect();
    let quartiles = |v: &[Option<f64>]| Quartiles::of(&v.iter().flatten().copied().collect::<Vec<_>>());

    Ok(PrivacyReport {
        original_mahalanobis: mahalanobis(orig),
        perturbed_mahalanobis: mahalanobis(pert),
        original_min_distance_quartiles: quartiles(&original_min_distance),
        perturbed_min_distance_quartiles: quartiles(&perturbed_min_distance),
        original_min_distance,
        perturbed_min_distance,
        identical_row_fraction: if orig.n() == 0 {
            1.0
        } else {
            identical as f64 / orig.n() as f64
        },
        distance_to_original,
    })
}
