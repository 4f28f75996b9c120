//! Per-metric CSV tables written next to an evaluation report.

use std::path::Path;

use rwn_core::metrics::{EvaluationReport, OlsFit, Quartiles};

use crate::commands::create_dir;
use crate::{CliResult, Failure};

fn fmt(v: Option<f64>, na: &str) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => na.to_string(),
    }
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let ctx = |e: csv::Error| Failure::io(e).context(format!("writing {}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(ctx)?;
    w.write_record(header).map_err(ctx)?;
    for r in rows {
        w.write_record(r).map_err(ctx)?;
    }
    w.flush()
        .map_err(|e| Failure::io(e).context(format!("writing {}", path.display())))
}

fn matrix(path: &Path, names: &[String], m: &[Vec<Option<f64>>], na: &str) -> CliResult<()> {
    let header: Vec<String> = std::iter::once("column".to_string())
        .chain(names.iter().cloned())
        .collect();
    let rows: Vec<Vec<String>> = names
        .iter()
        .zip(m)
        .map(|(name, row)| {
            std::iter::once(name.clone())
                .chain(row.iter().map(|v| fmt(*v, na)))
                .collect()
        })
        .collect();
    write_rows(path, &header, &rows)
}

fn per_record(path: &Path, a: &[Option<f64>], b: &[Option<f64>], na: &str) -> CliResult<()> {
    let header = ["record_index", "original", "perturbed"].map(String::from);
    let rows: Vec<Vec<String>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| vec![i.to_string(), fmt(*x, na), fmt(*y, na)])
        .collect();
    write_rows(path, &header, &rows)
}

fn cooks_by_record(fit: &OlsFit, n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; n];
    for (&row, &c) in fit.rows.iter().zip(&fit.cooks_distance) {
        out[row] = Some(c);
    }
    out
}

fn quartile_row(name: &str, q: Option<Quartiles>, na: &str) -> Vec<String> {
    let mut row = vec![name.to_string()];
    match q {
        Some(q) => row.extend([q.min, q.q1, q.median, q.q3, q.max].iter().map(|v| format!("{v}"))),
        None => row.extend(std::iter::repeat_n(na.to_string(), 5)),
    }
    row
}

/// Correlation matrices, Cook's distances, Mahalanobis and minimum
/// distances per record, min-distance quartiles and PCA proportions.
pub fn write_all(r: &EvaluationReport, dir: &Path, na: &str) -> CliResult<()> {
    create_dir(dir)?;
    let c = &r.correlation;
    matrix(&dir.join("correlation_original.csv"), &c.columns, &c.original, na)?;
    matrix(&dir.join("correlation_perturbed.csv"), &c.columns, &c.perturbed, na)?;

    if let Some(reg) = &r.regression {
        per_record(
            &dir.join("cooks_distance.csv"),
            &cooks_by_record(&reg.original, r.records),
            &cooks_by_record(&reg.perturbed, r.records),
            na,
        )?;
        let header = [
            "term",
            "original_coefficient",
            "original_se",
            "perturbed_coefficient",
            "perturbed_se",
        ]
        .map(String::from);
        let rows: Vec<Vec<String>> = (0..reg.original.terms.len())
            .map(|t| {
                vec![
                    reg.original.terms[t].clone(),
                    format!("{}", reg.original.coefficients[t]),
                    format!("{}", reg.original.standard_errors[t]),
                    format!("{}", reg.perturbed.coefficients[t]),
                    format!("{}", reg.perturbed.standard_errors[t]),
                ]
            })
            .collect();
        write_rows(&dir.join("coefficients.csv"), &header, &rows)?;
    }

    let p = &r.privacy;
    per_record(
        &dir.join("mahalanobis.csv"),
        &p.original_mahalanobis.distances,
        &p.perturbed_mahalanobis.distances,
        na,
    )?;
    per_record(
        &dir.join("min_distance.csv"),
        &p.original_min_distance,
        &p.perturbed_min_distance,
        na,
    )?;
    let header = ["dataset", "min", "q1", "median", "q3", "max"].map(String::from);
    write_rows(
        &dir.join("min_distance_quartiles.csv"),
        &header,
        &[
            quartile_row("original", p.original_min_distance_quartiles, na),
            quartile_row("perturbed", p.perturbed_min_distance_quartiles, na),
        ],
    )?;

    if let Some(pca) = &r.pca {
        let header = [
            "component",
            "original_sd",
            "original_proportion",
            "perturbed_sd",
            "perturbed_proportion",
        ]
        .map(String::from);
        let k = pca.original.proportions.len().max(pca.perturbed.proportions.len());
        let get = |v: &[f64], i: usize| fmt(v.get(i).copied(), na);
        let rows: Vec<Vec<String>> = (0..k)
            .map(|i| {
                vec![
                    (i + 1).to_string(),
                    get(&pca.original.standard_deviations, i),
                    get(&pca.original.proportions, i),
                    get(&pca.perturbed.standard_deviations, i),
                    get(&pca.perturbed.proportions, i),
                ]
            })
            .collect();
        write_rows(&dir.join("pca.csv"), &header, &rows)?;
    }
    Ok(())
}
