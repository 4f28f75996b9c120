//! Seeded synthetic datasets for tests, experiments and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Cell, ColumnSchema, Dataset};
use crate::rng::{Domain, Streams};

/// `n` draws of a standard bivariate normal with correlation `rho`, as
/// columns `x` and `y`.
pub fn bivariate_normal(n: usize, rho: f64, seed: u64) -> Dataset {
    let mut rng = Streams::new(seed).stream(Domain::Synthetic, 0, 0);
    let s = (1.0 - rho * rho).sqrt();
    let cells = (0..n)
        .flat_map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            [Cell::Numeric(z1), Cell::Numeric(rho * z1 + s * z2)]
        })
        .collect();
    Dataset::new(vec![ColumnSchema::numeric("x"), ColumnSchema::numeric("y")], cells)
        .expect("generated cells match the schema")
}

/// Linear data `y = 1 + 2·x1 − x2 + noise` with record 0 replaced by a
/// gross outlier: high leverage in `x1` and a response far off the line.
pub fn outlier_regression(n: usize, seed: u64) -> Dataset {
    assert!(n >= 2, "need room for the outlier and at least one inlier");
    let mut rng = Streams::new(seed).stream(Domain::Synthetic, 1, 0);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let x1: f64 = rng.sample(StandardNormal);
            let x2: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            vec![x1, x2, 1.0 + 2.0 * x1 - x2 + 0.5 * e]
        })
        .collect();
    rows[0] = vec![4.0, 0.0, 1.0 + 2.0 * 4.0 - 15.0];
    Dataset::from_numeric_rows(&["x1", "x2", "y"], &rows).expect("rectangular rows")
}

/// Mixed-type data: `p_num` normal columns, `p_cat` categorical columns with
/// 2 to 4 levels, and each cell independently missing with `missing_rate`.
pub fn random_mixed(n: usize, p_num: usize, p_cat: usize, missing_rate: f64, seed: u64) -> Dataset {
    let mut rng = Streams::new(seed).stream(Domain::Synthetic, 2, 0);
    let mut schema: Vec<ColumnSchema> = (0..p_num).map(|j| ColumnSchema::numeric(format!("x{j}"))).collect();
    let levels: Vec<u32> = (0..p_cat).map(|_| rng.random_range(2..=4)).collect();
    for (j, &l) in levels.iter().enumerate() {
        schema.push(ColumnSchema::categorical(
            format!("c{j}"),
            (0..l).map(|v| format!("L{v}")),
        ));
    }
    let mut cells = Vec::with_capacity(n * (p_num + p_cat));
    for _ in 0..n {
        for _ in 0..p_num {
            let v: f64 = rng.sample(StandardNormal);
            // round to keep duplicates and ties in play
            let v = (v * 100.0).round() / 100.0;
            cells.push(if rng.random_bool(missing_rate) {
                Cell::Missing
            } else {
                Cell::Numeric(v)
            });
        }
        for &l in &levels {
            let c = rng.random_range(0..l);
            cells.push(if rng.random_bool(missing_rate) {
                Cell::Missing
            } else {
                Cell::Categorical(c)
            });
        }
    }
    Dataset::new(schema, cells).expect("generated cells match the schema")
}

/// Clustered numeric data used by the benchmarks and complexity checks.
pub fn clustered(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = Streams::new(seed).stream(Domain::Synthetic, 3, 0);
    let centers: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..centers.len())];
            c.iter().map(|&m| m + rng.sample::<f64, _>(StandardNormal)).collect()
        })
        .collect();
    let names: Vec<String> = (0..p).map(|j| format!("v{j}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Dataset::from_numeric_rows(&names, &rows).expect("rectangular rows")
}
