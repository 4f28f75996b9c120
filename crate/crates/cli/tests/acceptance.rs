//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! Criteria 5 and 6 need the cleaned body-fat data (241 records with columns
//! `siri`, `bmi`, `neck`, `chest`, `abdomen`, `hip`, ...). Point
//! `RWN_BODYFAT_CSV` at it, or place it at `tests/data/bodyfat.csv`; without
//! it those two criteria report FAIL and make no assertion.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwn_core::metrics::{
    classification_study, correlation_report, mahalanobis, ols, regression_report, theorem_check,
    ClassificationStudyConfig, KnnClassifier, TheoremCheckConfig,
};
use rwn_core::neighborhoods::{decode_rank, encode_rank, pair_count};
use rwn_core::{load_csv, provenance_check, run, synth, BackendKind, CsvOptions, Dataset, RwnConfig, SchemaSource};

/// Written straight to stderr so the line shows even when output is captured.
fn report(n: u32, ok: bool, detail: String) {
    let line = format!("criterion {n}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn load(path: &Path) -> Dataset {
    load_csv(path, SchemaSource::Infer, &CsvOptions::default()).unwrap()
}

fn random_backend(rng: &mut ChaCha8Rng, kind: BackendKind, n: usize) -> RwnConfig {
    let mut cfg = RwnConfig {
        eps: [0.0, 0.3, 1.0, 2.5][rng.random_range(0..4)],
        k: rng.random_range(1..=4),
        q: [0.0, 0.3, 0.7, 1.0][rng.random_range(0..4)],
        seed: rng.random(),
        backend: kind,
        ..RwnConfig::default()
    };
    match kind {
        BackendKind::Exact => {}
        BackendKind::Pool => {
            cfg.m = Some(rng.random_range(1..=n / 2));
            cfg.fresh_pool_per_point = rng.random_bool(0.5);
        }
        BackendKind::PairSample => cfg.m = Some(rng.random_range(1..=4)),
        BackendKind::Partitioned => {
            cfg.u = Some(rng.random_range(1..=3));
            cfg.inner = Some([BackendKind::Exact, BackendKind::Pool, BackendKind::PairSample][rng.random_range(0..3)]);
            cfg.m = Some(rng.random_range(1..=3));
            cfg.fresh_pool_per_point = rng.random_bool(0.5);
        }
    }
    cfg
}

const BACKENDS: [BackendKind; 4] = [
    BackendKind::Exact,
    BackendKind::Pool,
    BackendKind::PairSample,
    BackendKind::Partitioned,
];

#[test]
fn criterion_01_rank_decoder_bijection() {
    let start = Instant::now();
    let n_max: u64 = 2000;
    // colex enumeration: ranks of pairs within 1..=n are a prefix of those
    // within 1..=n+1, so one pass covers every n <= n_max
    let (mut r, mut mismatches) = (0u64, 0u64);
    for j in 2..=n_max {
        for i in 1..j {
            r += 1;
            if decode_rank(r) != (i, j) || encode_rank(i, j).ok() != Some(r) {
                mismatches += 1;
            }
        }
        if pair_count(j) != r {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && elapsed < Duration::from_secs(10);
    report(1, ok, format!("{r} pairs, {mismatches} mismatches, {elapsed:.2?}"));
    assert!(ok);
}

#[test]
fn criterion_02_q_zero_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for t in 0..100 {
        let n = rng.random_range(10..80);
        let d = synth::random_mixed(n, rng.random_range(1..4), rng.random_range(0..3), 0.1, t);
        let mut cfg = random_backend(&mut rng, BACKENDS[t as usize % 4], n);
        cfg.q = 0.0;
        cfg.k = cfg.k.min(n / 4);
        let (_, out) = run(&d, &cfg).unwrap();
        if !out.data().identical(&d) || out.modified_count() != 0 {
            failures += 1;
        }
    }
    report(2, failures == 0, format!("{failures} of 100 runs differ"));
    assert_eq!(failures, 0);
}

#[test]
fn criterion_03_value_provenance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let mut modified = 0;
    for t in 0..1000u64 {
        let n = rng.random_range(12..50);
        let d = synth::random_mixed(n, rng.random_range(1..4), rng.random_range(0..3), 0.05, 10_000 + t);
        let cfg = random_backend(&mut rng, BACKENDS[t as usize % 4], n);
        let (ns, out) = run(&d, &cfg).unwrap();
        modified += out.modified_count();
        if !provenance_check(&d, &out, &ns) {
            failures += 1;
        }
    }
    report(
        3,
        failures == 0,
        format!("{failures} of 1000 runs fail, {modified} cells modified in total"),
    );
    assert_eq!(failures, 0);
}

#[test]
fn criterion_04_independence_limit() {
    let start = Instant::now();
    let r = theorem_check(&TheoremCheckConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let last = r.final_step();
    let corr_ok = (last.mean_correlation - 0.7).abs() <= 0.05;
    let ok = r.passed && last.mean_joint_gap <= 0.03 && corr_ok && elapsed < Duration::from_secs(120);
    let gaps: Vec<String> = r
        .steps
        .iter()
        .map(|s| format!("{}:{:.4}", s.eps, s.mean_joint_gap))
        .collect();
    report(
        4,
        ok,
        format!(
            "mean joint-CDF gap by eps [{}], corr(W') {:.4}, trend slope {:.4}, {elapsed:.1?}",
            gaps.join(" "),
            last.mean_correlation,
            r.trend_slope
        ),
    );
    assert!(ok);
}

fn bodyfat() -> Option<Dataset> {
    let path = std::env::var_os("RWN_BODYFAT_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| data_dir().join("bodyfat.csv"));
    path.exists().then(|| load(&path))
}

/// The swept radii. Both body-fat criteria gate on the smallest and report
/// the rest.
const BODYFAT_EPS: [f64; 3] = [0.25, 0.5, 1.0];
const PREDICTORS: [&str; 5] = ["bmi", "neck", "chest", "abdomen", "hip"];

/// Sign agreement and mean |delta| of the correlation matrix over 25 seeds.
fn correlation_sweep(d: &Dataset, eps: f64) -> (f64, f64) {
    let (mut compared, mut kept, mut delta_sum) = (0usize, 0usize, 0.0);
    for seed in 0..25 {
        let (_, out) = run(d, &RwnConfig::new(eps, 5, 1.0, seed)).unwrap();
        let c = correlation_report(d, out.data()).unwrap();
        compared += c.compared_pairs;
        kept += c.compared_pairs - c.sign_flips;
        delta_sum += c.mean_abs_delta.unwrap();
    }
    (kept as f64 / compared as f64, delta_sum / 25.0)
}

#[test]
fn criterion_05_correlation_preservation() {
    let Some(d) = bodyfat() else {
        report(5, false, "body-fat data not found; set RWN_BODYFAT_CSV".into());
        return;
    };
    let results: Vec<(f64, (f64, f64))> = BODYFAT_EPS.iter().map(|&e| (e, correlation_sweep(&d, e))).collect();
    let (agreement, mean_delta) = results[0].1;
    let ok = agreement >= 0.95 && mean_delta <= 0.10;
    let detail: Vec<String> = results
        .iter()
        .map(|(e, (a, m))| format!("eps={e}: sign agreement {a:.4}, mean |delta| {m:.4}"))
        .collect();
    report(5, ok, format!("n={}; {}", d.n(), detail.join("; ")));
    assert!(ok);
}

/// Standard errors within a factor of 2, their total, and sign flips.
fn standard_error_sweep(d: &Dataset, eps: f64) -> (usize, usize, usize) {
    let (mut within, mut total, mut flips) = (0usize, 0usize, 0usize);
    for seed in 0..25 {
        let (_, out) = run(d, &RwnConfig::new(eps, 5, 1.0, seed)).unwrap();
        let r = regression_report(d, out.data(), "siri", &PREDICTORS).unwrap();
        flips += r.coefficient_sign_flips;
        for t in 1..r.original.standard_errors.len() {
            let ratio = r.perturbed.standard_errors[t] / r.original.standard_errors[t];
            total += 1;
            within += usize::from((0.5..=2.0).contains(&ratio));
        }
    }
    (within, total, flips)
}

#[test]
fn criterion_06_standard_error_stability() {
    let Some(d) = bodyfat() else {
        report(6, false, "body-fat data not found; set RWN_BODYFAT_CSV".into());
        return;
    };
    let results: Vec<(f64, (usize, usize, usize))> =
        BODYFAT_EPS.iter().map(|&e| (e, standard_error_sweep(&d, e))).collect();
    let (within, total, _) = results[0].1;
    let ok = within as f64 / total as f64 >= 0.90;
    let detail: Vec<String> = results
        .iter()
        .map(|(e, (w, t, f))| format!("eps={e}: {w}/{t} standard errors within a factor of 2, {f} sign flips"))
        .collect();
    report(6, ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_07_outlier_protection() {
    let (mut cooks, mut maha, mut both) = (0, 0, 0);
    for rep in 0..25u64 {
        let d = synth::outlier_regression(200, rep);
        let (_, out) = run(&d, &RwnConfig::new(0.0, 5, 1.0, 1_000 + rep)).unwrap();
        let before = ols(&d, "y", &["x1", "x2"]).unwrap().max_cooks_distance().unwrap().1;
        let after = ols(out.data(), "y", &["x1", "x2"])
            .unwrap()
            .max_cooks_distance()
            .unwrap()
            .1;
        let c = after < before;
        let m = mahalanobis(out.data()).max().unwrap() < mahalanobis(&d).max().unwrap();
        cooks += usize::from(c);
        maha += usize::from(m);
        both += usize::from(c && m);
    }
    let ok = both >= 20;
    report(
        7,
        ok,
        format!("max Cook's lower in {cooks}/25, max Mahalanobis lower in {maha}/25, both in {both}/25"),
    );
    assert!(ok);
}

#[test]
fn criterion_08_prediction_delta() {
    let d = load(&data_dir().join("pima.csv"));
    assert_eq!(d.n(), 768);
    let cfg = ClassificationStudyConfig {
        label: "diabetes".into(),
        grid: [5, 10, 25, 50]
            .iter()
            .map(|&k| RwnConfig::new(0.0, k, 0.5, 8))
            .collect(),
        holdout: 200,
        reps: 25,
        seed: 8,
    };
    let s = classification_study(&d, &cfg, &KnnClassifier::default()).unwrap();
    let ok = s.grid.iter().all(|g| g.delta.abs() <= 0.05);
    let rows: Vec<String> = s
        .grid
        .iter()
        .map(|g| format!("k={} {:.3} ({:+.3})", g.config.k, g.mean_rate, g.delta))
        .collect();
    report(8, ok, format!("no-SDC {:.3}; {}", s.baseline, rows.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_09_complexity_counters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let start = Instant::now();
    let code = rwn_cli::run([
        "rwn",
        "bench",
        "--sizes",
        "1000,2000,4000",
        "--m",
        "100",
        "--u",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let (m, u) = (100u64, 4u64);
    let mut problems = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows += 1;
        let n: u64 = rec[0].parse().unwrap();
        let evals: u64 = rec[4].parse().unwrap();
        let ok = match &rec[1] {
            "exact" => evals == n * (n - 1) / 2,
            "pool" => evals <= m * n,
            "pair-sample" => evals == (n * m).div_ceil(2),
            "partitioned" => {
                let parts: Vec<u64> = rec[5].split(';').map(|p| p.parse().unwrap()).collect();
                let sum: u64 = parts.iter().sum();
                let target = (n * n) as f64 / (2 * u) as f64;
                parts.len() == u as usize && sum == evals && (sum as f64 / target - 1.0).abs() < 0.01
            }
            other => panic!("unexpected backend {other}"),
        };
        if !ok {
            problems.push(format!("{} n={n}: {evals}", &rec[1]));
        }
    }
    let ok = rows == 12 && problems.is_empty() && elapsed < Duration::from_secs(60);
    report(9, ok, format!("{rows} rows, mismatches {problems:?}, {elapsed:.1?}"));
    assert!(ok);
}

#[test]
fn criterion_10_determinism_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("w.csv");
    let d = synth::random_mixed(400, 3, 2, 0.05, 10);
    rwn_core::write_csv(&d, &input, &CsvOptions::default()).unwrap();
    let setups: [(&str, &[&str]); 5] = [
        ("exact", &["--backend", "exact"]),
        ("pool", &["--backend", "pool", "--m", "30"]),
        (
            "pool-fresh",
            &["--backend", "pool", "--m", "30", "--fresh-pool-per-point"],
        ),
        ("pair-sample", &["--backend", "pair-sample", "--m", "8"]),
        (
            "partitioned",
            &[
                "--backend",
                "partitioned",
                "--u",
                "4",
                "--inner",
                "pair-sample",
                "--m",
                "6",
            ],
        ),
    ];
    let mut differing = Vec::new();
    for (name, flags) in setups {
        let first = dir.path().join(format!("{name}-1.csv"));
        let mut args = vec!["rwn", "--workers", "1", "perturb", "--in", input.to_str().unwrap()];
        args.extend([
            "--eps",
            "0.4",
            "--k",
            "3",
            "--q",
            "0.8",
            "--seed",
            "42",
            "--out",
            first.to_str().unwrap(),
        ]);
        args.extend(flags.iter().copied());
        assert_eq!(rwn_cli::run(&args), 0, "{name}");
        let manifest = dir.path().join(format!("{name}-1.manifest.json"));
        let reference = std::fs::read(&first).unwrap();
        for workers in ["2", "8"] {
            let out = dir.path().join(format!("{name}-{workers}.csv"));
            let code = rwn_cli::run([
                "rwn",
                "--workers",
                workers,
                "perturb",
                "--from-manifest",
                manifest.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
            if std::fs::read(&out).unwrap() != reference {
                differing.push(format!("{name} with {workers} workers"));
            }
        }
    }
    let ok = differing.is_empty();
    report(
        10,
        ok,
        format!("5 backend setups x workers {{1, 2, 8}}; differing: {differing:?}"),
    );
    assert!(ok);
}
