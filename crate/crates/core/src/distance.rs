//! The pairwise distance shared by every neighborhood backend and by the
//! privacy metrics.

use crate::dataset::{standardize, ColumnKind, Dataset, StandardizedView};
use crate::error::{Result, RwnError};

/// A symmetric, nonnegative dissimilarity over records `0..len()`.
pub trait Metric: Sync {
    fn len(&self) -> usize;

    /// Distance between records `i` and `j`; callers guarantee bounds.
    fn between(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Weighted Euclidean distance over standardized numeric columns plus 0/1
/// mismatch terms for categorical columns.
#[derive(Debug, Clone)]
pub struct DistanceSpec {
    view: StandardizedView,
    weights: Vec<f64>,
}

impl DistanceSpec {
    pub fn new(view: StandardizedView) -> Self {
        let weights = vec![1.0; view.p()];
        Self { view, weights }
    }

    pub fn from_dataset(d: &Dataset) -> Self {
        Self::new(standardize(d))
    }

    pub fn with_weights(view: StandardizedView, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != view.p() {
            return Err(RwnError::config(
                "weights",
                format!("has {} entries for {} columns", weights.len(), view.p()),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(RwnError::config(
                "weights",
                format!("contains {w}; must be finite and >= 0"),
            ));
        }
        Ok(Self { view, weights })
    }

    pub fn view(&self) -> &StandardizedView {
        &self.view
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.view.n();
        for index in [i, j] {
            if index >= n {
                return Err(RwnError::IndexOutOfRange { index, len: n });
            }
        }
        Ok(self.between(i, j))
    }

    /// Distance from record `i` of this spec's view to record `j` of another
    /// view expressed in the same scaling. Missing-cell penalties come from
    /// this view.
    pub fn cross(&self, i: usize, other: &StandardizedView, j: usize) -> f64 {
        debug_assert_eq!(other.kinds(), self.view.kinds());
        self.squared(self.view.row_raw(i), other.row_raw(j)).sqrt()
    }

    fn squared(&self, a: &[f64], b: &[f64]) -> f64 {
        let kinds = self.view.kinds();
        let mut sum = 0.0;
        for c in 0..a.len() {
            let w = self.weights[c];
            if w == 0.0 {
                continue;
            }
            let (x, y) = (a[c], b[c]);
            let term = if x.is_nan() || y.is_nan() {
                self.view.missing_penalty(c)
            } else {
                match kinds[c] {
                    ColumnKind::Numeric => (x - y) * (x - y),
                    ColumnKind::Categorical => f64::from(u8::from(x != y)),
                }
            };
            sum += w * term;
        }
        sum
    }
}

impl Metric for DistanceSpec {
    fn len(&self) -> usize {
        self.view.n()
    }

    fn between(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.squared(self.view.row_raw(i), self.view.row_raw(j)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cell, ColumnSchema};

    #[test]
    fn identical_rows_are_at_zero() {
        let d = Dataset::from_numeric_rows(&["a", "b"], &[vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 0.0]]).unwrap();
        let spec = DistanceSpec::from_dataset(&d);
        assert_eq!(spec.distance(0, 1).unwrap(), 0.0);
        assert!(spec.distance(0, 2).unwrap() > 0.0);
    }

    #[test]
    fn single_categorical_mismatch_is_one() {
        let schema = vec![ColumnSchema::numeric("x"), ColumnSchema::categorical("c", ["a", "b"])];
        let cells = vec![
            Cell::Numeric(1.0),
            Cell::Categorical(0),
            Cell::Numeric(1.0),
            Cell::Categorical(1),
            Cell::Numeric(4.0),
            Cell::Categorical(0),
        ];
        let d = Dataset::new(schema, cells).unwrap();
        let spec = DistanceSpec::from_dataset(&d);
        assert_eq!(spec.distance(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn standardized_rows_minus_one_vs_one() {
        // column x = {-1, 0, 1} has mean 0 and sample sd 1, so z = x
        let d = Dataset::from_numeric_rows(&["x", "y"], &[vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let spec = DistanceSpec::from_dataset(&d);
        assert_eq!(spec.distance(0, 2).unwrap(), 2.0);
    }

    #[test]
    fn out_of_range_index() {
        let d = Dataset::from_numeric_rows(&["x"], &[vec![0.0], vec![1.0]]).unwrap();
        let spec = DistanceSpec::from_dataset(&d);
        assert!(matches!(
            spec.distance(0, 2),
            Err(RwnError::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn weights_scale_terms_and_are_validated() {
        let d = Dataset::from_numeric_rows(&["x", "y"], &[vec![-1.0, -1.0], vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let view = standardize(&d);
        let spec = DistanceSpec::with_weights(view.clone(), vec![1.0, 0.0]).unwrap();
        assert_eq!(spec.distance(0, 2).unwrap(), 2.0);
        assert!(DistanceSpec::with_weights(view.clone(), vec![1.0]).is_err());
        assert!(DistanceSpec::with_weights(view, vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn missing_cells_use_column_penalty() {
        let schema = vec![ColumnSchema::numeric("x"), ColumnSchema::numeric("y")];
        let cells = vec![
            Cell::Numeric(-1.0),
            Cell::Numeric(0.0),
            Cell::Numeric(0.0),
            Cell::Missing,
            Cell::Numeric(1.0),
            Cell::Numeric(0.0),
        ];
        let d = Dataset::new(schema, cells).unwrap();
        let spec = DistanceSpec::from_dataset(&d);
        // y is constant over its observed cells, so its penalty is 0
        assert_eq!(spec.distance(0, 1).unwrap(), 1.0);
    }
}
