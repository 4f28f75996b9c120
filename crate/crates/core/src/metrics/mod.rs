//! Utility and privacy measures on an original/released pair, plus the
//! Monte Carlo independence check and the prediction study.

mod classify;
mod correlation;
mod pca;
mod privacy;
mod regression;
mod theorem;

use serde::Serialize;

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{Result, RwnError};

pub use classify::{
    classification_study, ClassificationStudy, ClassificationStudyConfig, Classifier, GridResult, KnnClassifier,
};
pub use correlation::{correlation_matrix, correlation_report, pearson, CorrelationReport};
pub use pca::{jacobi_eigen, pca, pca_report, PcaReport, PcaSummary};
pub use privacy::{mahalanobis, min_distances, privacy_report, Mahalanobis, PrivacyReport};
pub use regression::{ols, regression_report, OlsFit, RegressionReport};
pub use theorem::{
    cdf_gap, marginal_gap, quantile_grid, theorem_check, Mechanism, TheoremCheck, TheoremCheckConfig, TheoremStep,
};

/// Paired datasets must share a schema and a row count.
pub(crate) fn check_paired(orig: &Dataset, pert: &Dataset) -> Result<()> {
    if orig.schema() != pert.schema() {
        return Err(RwnError::Schema(
            "original and perturbed datasets have different schemas".into(),
        ));
    }
    if orig.n() != pert.n() {
        return Err(RwnError::ShapeMismatch(format!(
            "original has {} rows, perturbed has {}",
            orig.n(),
            pert.n()
        )));
    }
    Ok(())
}

/// Five-number summary with linearly interpolated quartiles (type 7).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

pub(crate) fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationOptions {
    /// `(response, predictors)` for an optional regression comparison.
    pub regression: Option<(String, Vec<String>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub records: usize,
    pub columns: usize,
    pub correlation: CorrelationReport,
    pub regression: Option<RegressionReport>,
    pub privacy: PrivacyReport,
    pub pca: Option<PcaReport>,
    pub notes: Vec<String>,
}

pub fn evaluate(orig: &Dataset, pert: &Dataset, opts: &EvaluationOptions) -> Result<EvaluationReport> {
    check_paired(orig, pert)?;
    let mut notes = vec![
        "correlations use pairwise-complete observations; nullified records drop out".to_string(),
        "distances use the original data's column scaling for both datasets".to_string(),
    ];
    if orig.schema().iter().any(|c| c.kind == ColumnKind::Categorical) {
        notes.push("categorical columns enter distances as 0/1 mismatches and are excluded from correlations, Mahalanobis distances and PCA".into());
    }
    let regression = match &opts.regression {
        Some((y, xs)) => {
            let xs: Vec<&str> = xs.iter().map(String::as_str).collect();
            Some(regression_report(orig, pert, y, &xs)?)
        }
        None => None,
    };
    let privacy = privacy_report(orig, pert)?;
    if privacy.original_mahalanobis.pseudo_inverse || privacy.perturbed_mahalanobis.pseudo_inverse {
        notes.push("covariance was singular; Mahalanobis distances use a pseudo-inverse".into());
    }
    let pca = match pca_report(orig, pert) {
        Ok(r) => Some(r),
        Err(e @ (RwnError::InsufficientData(_) | RwnError::NonConvergence { .. })) => {
            notes.push(format!("PCA skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        records: orig.n(),
        columns: orig.p(),
        correlation: correlation_report(orig, pert)?,
        regression,
        privacy,
        pca,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnSchema;

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert!(Quartiles::of(&[]).is_none());
    }

    #[test]
    fn mismatched_pairs_rejected() {
        let a = Dataset::from_numeric_rows(&["x"], &[vec![1.0], vec![2.0]]).unwrap();
        let b = Dataset::from_numeric_rows(&["y"], &[vec![1.0], vec![2.0]]).unwrap();
        let c = Dataset::from_numeric_rows(&["x"], &[vec![1.0]]).unwrap();
        assert!(matches!(check_paired(&a, &b), Err(RwnError::Schema(_))));
        assert!(matches!(check_paired(&a, &c), Err(RwnError::ShapeMismatch(_))));
    }

    #[test]
    fn identity_evaluation() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                vec![t, (t * 0.7).sin() + t / 10.0, (t * 1.3).cos()]
            })
            .collect();
        let d = Dataset::from_numeric_rows(&["a", "b", "y"], &rows).unwrap();
        let opts = EvaluationOptions {
            regression: Some(("y".into(), vec!["a".into(), "b".into()])),
        };
        let r = evaluate(&d, &d, &opts).unwrap();
        assert_eq!(r.privacy.identical_row_fraction, 1.0);
        assert_eq!(r.correlation.max_abs_delta, Some(0.0));
        assert_eq!(r.regression.unwrap().coefficient_sign_flips, 0);
        assert!(r.pca.is_some());
    }

    #[test]
    fn categorical_note() {
        let schema = vec![ColumnSchema::numeric("x"), ColumnSchema::categorical("c", ["a", "b"])];
        let cells = (0..6)
            .flat_map(|i| [crate::Cell::Numeric(i as f64), crate::Cell::Categorical((i % 2) as u32)])
            .collect();
        let d = Dataset::new(schema, cells).unwrap();
        let r = evaluate(&d, &d, &EvaluationOptions::default()).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("categorical")));
    }
}
