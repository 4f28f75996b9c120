use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{Result, RwnError};

use super::check_paired;

/// Ordinary least squares with an intercept, fitted on complete rows.
#[derive(Debug, Clone, Serialize)]
pub struct OlsFit {
    /// `"(intercept)"` followed by the predictor names.
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Unbiased residual variance, RSS / (n − k).
    pub residual_variance: f64,
    /// Dataset rows used in the fit.
    pub rows: Vec<usize>,
    pub leverage: Vec<f64>,
    pub cooks_distance: Vec<f64>,
}

impl OlsFit {
    pub fn max_cooks_distance(&self) -> Option<(usize, f64)> {
        self.cooks_distance
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(pos, &d)| (self.rows[pos], d))
    }
}

fn numeric_index(d: &Dataset, name: &str) -> Result<usize> {
    let j = d
        .column_index(name)
        .ok_or_else(|| RwnError::Schema(format!("no column named `{name}`")))?;
    if d.schema()[j].kind != ColumnKind::Numeric {
        return Err(RwnError::Schema(format!("column `{name}` is not numeric")));
    }
    Ok(j)
}

/// Fit `response ~ 1 + predictors` by Householder QR.
///
/// Standard errors use `s²·(XᵀX)⁻¹ = s²·R⁻¹R⁻ᵀ`; leverages are the squared
/// row norms of the thin Q; Cook's distance is
/// `e²·h / (k·s²·(1 − h)²)`.
pub fn ols(d: &Dataset, response: &str, predictors: &[&str]) -> Result<OlsFit> {
    let y_col = numeric_index(d, response)?;
    let x_cols = predictors
        .iter()
        .map(|p| numeric_index(d, p))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<usize> = (0..d.n())
        .filter(|&i| {
            std::iter::once(y_col)
                .chain(x_cols.iter().copied())
                .all(|j| !d.cell(i, j).is_missing())
        })
        .collect();
    let k = x_cols.len() + 1;
    let n = rows.len();
    if n < k + 1 {
        return Err(RwnError::InsufficientData(format!(
            "{n} complete rows for {k} coefficients; at least {} required",
            k + 1
        )));
    }

    let value = |i: usize, j: usize| d.cell(i, j).as_f64().expect("complete row");
    let x = DMatrix::from_fn(n, k, |r, c| if c == 0 { 1.0 } else { value(rows[r], x_cols[c - 1]) });
    let y = DVector::from_fn(n, |r, _| value(rows[r], y_col));

    let qr = x.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag.max(f64::MIN_POSITIVE)) {
        return Err(RwnError::RankDeficient);
    }
    let qty = q.transpose() * &y;
    let beta = r.solve_upper_triangular(&qty).ok_or(RwnError::RankDeficient)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(RwnError::RankDeficient)?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let residuals = &y - &x * &beta;
    let rss = residuals.norm_squared();
    let s2 = rss / (n - k) as f64;
    let standard_errors = (0..k).map(|j| (s2 * xtx_inv[(j, j)]).max(0.0).sqrt()).collect();
    let leverage: Vec<f64> = (0..n).map(|i| q.row(i).norm_squared()).collect();
    let cooks_distance = (0..n)
        .map(|i| {
            let h = leverage[i];
            let e = residuals[i];
            if s2 <= 0.0 || e == 0.0 {
                0.0
            } else {
                (e * e * h / (k as f64 * s2 * (1.0 - h).powi(2))).max(0.0)
            }
        })
        .collect();

    Ok(OlsFit {
        terms: std::iter::once("(intercept)".to_string())
            .chain(predictors.iter().map(|p| p.to_string()))
            .collect(),
        coefficients: beta.iter().copied().collect(),
        standard_errors,
        residual_variance: s2,
        rows,
        leverage,
        cooks_distance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub response: String,
    pub predictors: Vec<String>,
    pub original: OlsFit,
    pub perturbed: OlsFit,
    /// Terms whose estimated coefficient changed sign.
    pub coefficient_sign_flips: usize,
}

pub fn regression_report(
    orig: &Dataset,
    pert: &Dataset,
    response: &str,
    predictors: &[&str],
) -> Result<RegressionReport> {
    check_paired(orig, pert)?;
    let original = ols(orig, response, predictors)?;
    let perturbed = ols(pert, response, predictors)?;
    let coefficient_sign_flips = original
        .coefficients
        .iter()
        .zip(&perturbed.coefficients)
        .filter(|(a, b)| **a * **b < 0.0)
        .count();
    Ok(RegressionReport {
        response: response.to_string(),
        predictors: predictors.iter().map(|p| p.to_string()).collect(),
        original,
        perturbed,
        coefficient_sign_flips,
    })
}
