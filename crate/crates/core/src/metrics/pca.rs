use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Result, RwnError};

use super::check_paired;
use super::correlation::pearson;

const TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and unit eigenvectors (as columns, row-major
/// `p×p`) of a symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let p = a.len();
    if a.iter().any(|r| r.len() != p) {
        return Err(RwnError::ShapeMismatch("matrix is not square".into()));
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let off = |m: &Vec<Vec<f64>>| {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    s += m[i][j] * m[i][j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > TOLERANCE {
        if sweeps == MAX_SWEEPS {
            return Err(RwnError::NonConvergence {
                sweeps,
                off_norm: off(&m),
            });
        }
        sweeps += 1;
        for r in 0..p {
            for c in r + 1..p {
                if m[r][c] == 0.0 {
                    continue;
                }
                let theta = (m[c][c] - m[r][r]) / (2.0 * m[r][c]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..p {
                    let (mkr, mkc) = (m[k][r], m[k][c]);
                    m[k][r] = cos * mkr - sin * mkc;
                    m[k][c] = sin * mkr + cos * mkc;
                }
                for k in 0..p {
                    let (mrk, mck) = (m[r][k], m[c][k]);
                    m[r][k] = cos * mrk - sin * mck;
                    m[c][k] = sin * mrk + cos * mck;
                }
                for row in v.iter_mut() {
                    let (vr, vc) = (row[r], row[c]);
                    row[r] = cos * vr - sin * vc;
                    row[c] = sin * vr + cos * vc;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| m[y][y].total_cmp(&m[x][x]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = (0..p).map(|row| order.iter().map(|&i| v[row][i]).collect()).collect();
    Ok((values, vectors))
}

/// Principal components of the standardized numeric columns.
#[derive(Debug, Clone, Serialize)]
pub struct PcaSummary {
    pub columns: Vec<String>,
    /// Columns left out because they were constant over complete rows.
    pub dropped_constant: Vec<String>,
    pub complete_rows: usize,
    pub eigenvalues: Vec<f64>,
    pub standard_deviations: Vec<f64>,
    pub proportions: Vec<f64>,
}

/// PCA on the correlation matrix of the complete rows.
pub fn pca(d: &Dataset) -> Result<PcaSummary> {
    let cols = d.numeric_columns();
    let rows: Vec<Vec<f64>> = (0..d.n())
        .filter_map(|i| {
            cols.iter()
                .map(|&j| d.cell(i, j).as_f64())
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    if rows.len() < 2 {
        return Err(RwnError::InsufficientData(format!(
            "PCA needs at least 2 complete rows, got {}",
            rows.len()
        )));
    }
    let series: Vec<Vec<f64>> = (0..cols.len()).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..cols.len()).partition(|&c| series[c].iter().any(|&v| v != series[c][0]));
    if kept.is_empty() {
        return Err(RwnError::InsufficientData("every numeric column is constant".into()));
    }
    let corr: Vec<Vec<f64>> = kept
        .iter()
        .map(|&a| {
            kept.iter()
                .map(|&b| {
                    if a == b {
                        1.0
                    } else {
                        pearson(&series[a], &series[b]).unwrap_or(0.0)
                    }
                })
                .collect()
        })
        .collect();
    let (eigenvalues, _) = jacobi_eigen(&corr)?;
    let eigenvalues: Vec<f64> = eigenvalues.into_iter().map(|e| e.max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    let name = |c: usize| d.schema()[cols[c]].name.clone();
    Ok(PcaSummary {
        columns: kept.iter().map(|&c| name(c)).collect(),
        dropped_constant: dropped.iter().map(|&c| name(c)).collect(),
        complete_rows: rows.len(),
        standard_deviations: eigenvalues.iter().map(|e| e.sqrt()).collect(),
        proportions: eigenvalues.iter().map(|e| e / total).collect(),
        eigenvalues,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaReport {
    pub original: PcaSummary,
    pub perturbed: PcaSummary,
}

pub fn pca_report(orig: &Dataset, pert: &Dataset) -> Result<PcaReport> {
    check_paired(orig, pert)?;
    Ok(PcaReport {
        original: pca(orig)?,
        perturbed: pca(pert)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (2.0, 0.7, -1.3);
        let (values, vectors) = jacobi_eigen(&[vec![a, b], vec![b, c]]).unwrap();
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        assert!((values[0] - (mid + rad)).abs() < 1e-10);
        assert!((values[1] - (mid - rad)).abs() < 1e-10);
        // A v = λ v for the leading vector
        let (v0, v1) = (vectors[0][0], vectors[1][0]);
        assert!((a * v0 + b * v1 - values[0] * v0).abs() < 1e-10);
        assert!((b * v0 + c * v1 - values[0] * v1).abs() < 1e-10);
    }

    #[test]
    fn three_by_three_closed_form() {
        // symmetric matrix with a known characteristic polynomial solved by the
        // trigonometric formula for real roots of a cubic
        let m = vec![vec![4.0, 1.0, -2.0], vec![1.0, 2.0, 0.5], vec![-2.0, 0.5, 3.0]];
        let (values, _) = jacobi_eigen(&m).unwrap();
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| (m[i][j] - if i == j { q } else { 0.0 }) / p).collect())
            .collect();
        let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        for (got, want) in values.iter().zip([e1, e2, e3]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn perfectly_correlated_pair() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 3.0 * i as f64 - 1.0]).collect();
        let d = Dataset::from_numeric_rows(&["x", "y"], &rows).unwrap();
        let s = pca(&d).unwrap();
        assert!((s.proportions[0] - 1.0).abs() < 1e-12);
        assert!(s.proportions[1].abs() < 1e-12);
    }

    #[test]
    fn isotropic_case() {
        let (values, _) = jacobi_eigen(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(values, vec![1.0; 3]);
        // uncorrelated ±1 design
        let rows = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let s = pca(&Dataset::from_numeric_rows(&["a", "b"], &rows).unwrap()).unwrap();
        for p in &s.proportions {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn proportions_sum_to_one_and_constant_dropped() {
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|i| {
                let t = i as f64;
                vec![t.sin(), 5.0, t.cos() + 0.1 * t, (t * t) % 7.0]
            })
            .collect();
        let s = pca(&Dataset::from_numeric_rows(&["a", "k", "b", "c"], &rows).unwrap()).unwrap();
        assert_eq!(s.dropped_constant, vec!["k".to_string()]);
        assert!((s.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s.proportions.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn too_few_rows() {
        let d = Dataset::from_numeric_rows(&["a"], &[vec![1.0]]).unwrap();
        assert!(matches!(pca(&d), Err(RwnError::InsufficientData(_))));
    }
}
