use std::path::Path;
use std::time::Instant;

use rwn_core::dataset::{load_csv, read_schema, CsvOptions, SchemaSource};
use rwn_core::metrics::{evaluate as evaluate_pair, EvaluationOptions};
use rwn_core::neighborhoods::{self, min_distance_profile, write_profile_file};
use rwn_core::{synth, write_csv, BackendKind, Dataset, DistanceSpec, RwnConfig};

use crate::args::{BenchArgs, DiagnoseArgs, EvaluateArgs, PerturbArgs};
use crate::config::{resolve, ConfigFile};
use crate::manifest::{manifest_path, sha256_file, RunManifest};
use crate::{tables, CliResult, Failure};

const DEFAULT_NA: &str = "NA";

fn load(input: &Path, schema: Option<&Path>, na: &str) -> CliResult<Dataset> {
    let source = match schema {
        Some(p) => SchemaSource::Given(read_schema(p)?),
        None => SchemaSource::Infer,
    };
    let opts = CsvOptions {
        missing: na.to_string(),
    };
    Ok(load_csv(input, source, &opts)?)
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn perturb(a: PerturbArgs) -> CliResult<()> {
    let start = Instant::now();
    let previous = a.from_manifest.as_deref().map(RunManifest::read).transpose()?;
    let base = previous.as_ref().map(|m| ConfigFile::from(m.config.clone()));
    let resolved = resolve(&a.params, base, true)?;
    if resolved.eps_list.len() > 1 {
        return Err(Failure::config("eps: perturb takes a single value"));
    }
    let cfg = resolved.config;
    let input = a
        .input
        .input
        .or_else(|| previous.as_ref().map(|m| m.input.clone()))
        .ok_or_else(|| Failure::config("--in is required (or --from-manifest)"))?;
    let schema = a
        .input
        .schema
        .or_else(|| previous.as_ref().and_then(|m| m.schema.clone()));
    let na = a
        .input
        .na
        .or_else(|| previous.as_ref().map(|m| m.missing_token.clone()))
        .unwrap_or_else(|| DEFAULT_NA.to_string());
    let output = a
        .out
        .or_else(|| previous.as_ref().map(|m| m.output.clone()))
        .ok_or_else(|| Failure::config("--out is required (or --from-manifest)"))?;

    let d = load(&input, schema.as_deref(), &na)?;
    let (ns, released) = rwn_core::run(&d, &cfg)?;
    write_csv(released.data(), &output, &CsvOptions { missing: na.clone() })?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input_sha256: sha256_file(&input)?,
        output_sha256: sha256_file(&output)?,
        records: d.n(),
        columns: d.p(),
        wall_ms: ms(start),
        distance_evaluations: ns.evaluations(),
        partition_evaluations: ns.partition_evaluations().to_vec(),
        modified_cells: released.modified_count(),
        nullified_records: released.nullified_records(),
        config: cfg,
        input,
        schema,
        output: output.clone(),
        missing_token: na,
    };
    manifest.write(&manifest_path(&output))
}

/// `y~a,b,c` → `("y", ["a", "b", "c"])`.
pub fn parse_regression(spec: &str) -> CliResult<(String, Vec<String>)> {
    let bad = || Failure::config(format!("regress: expected `response~pred1,pred2,...`, got `{spec}`"));
    let (y, xs) = spec.split_once('~').ok_or_else(bad)?;
    let y = y.trim();
    let xs: Vec<String> = xs.split(',').map(|x| x.trim().to_string()).collect();
    if y.is_empty() || xs.iter().any(String::is_empty) {
        return Err(bad());
    }
    Ok((y.to_string(), xs))
}

pub fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let regression = a.regress.as_deref().map(parse_regression).transpose()?;
    let na = a.na.as_deref().unwrap_or(DEFAULT_NA);
    let orig = load(&a.original, a.schema.as_deref(), na)?;
    let opts = CsvOptions {
        missing: na.to_string(),
    };
    let pert = load_csv(&a.perturbed, SchemaSource::Given(orig.schema().to_vec()), &opts)
        .map_err(|e| Failure::from(e).context(format!("perturbed file {}", a.perturbed.display())))?;
    let report = evaluate_pair(&orig, &pert, &EvaluationOptions { regression })?;

    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match &a.out {
        Some(path) => {
            std::fs::write(path, json).map_err(|e| Failure::io(e).context(format!("writing {}", path.display())))?
        }
        None => print!("{json}"),
    }
    if let Some(dir) = &a.tables {
        tables::write_all(&report, dir, na)?;
    }
    Ok(())
}

pub fn diagnose(a: DiagnoseArgs) -> CliResult<()> {
    let resolved = resolve(&a.params, None, false)?;
    let cfg = resolved.config;
    let input = a.input.input.ok_or_else(|| Failure::config("--in is required"))?;
    let na = a.input.na.unwrap_or_else(|| DEFAULT_NA.to_string());
    let d = load(&input, a.input.schema.as_deref(), &na)?;
    if d.n() < 2 {
        return Err(Failure::data(format!("{} record(s): no pairs to measure", d.n())));
    }
    let spec = cfg.distance_spec(&d)?;
    let backend = cfg.backend_spec()?;
    create_dir(&a.out_dir)?;
    for &eps in &resolved.eps_list {
        let ns = neighborhoods::build(&spec, &backend, eps, cfg.k, cfg.seed)?;
        let rows = min_distance_profile(&ns)?;
        write_profile_file(&rows, a.out_dir.join(format!("min_distance_eps_{eps}.csv")), &na)?;
    }
    Ok(())
}

pub(crate) fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(e).context(format!("creating {}", dir.display())))
}

pub fn bench(a: BenchArgs) -> CliResult<()> {
    let mut backends = Vec::new();
    for &kind in &a.backends {
        let cfg = RwnConfig {
            eps: a.eps,
            k: a.k,
            backend: kind,
            m: Some(a.m),
            u: Some(a.u),
            inner: Some(a.inner),
            seed: a.seed,
            ..RwnConfig::default()
        };
        cfg.validate()?;
        backends.push((kind, cfg.backend_spec()?));
    }
    if a.dims == 0 {
        return Err(Failure::config("dims: must be >= 1"));
    }
    let sink: Box<dyn std::io::Write> = match &a.out {
        Some(p) => {
            Box::new(std::fs::File::create(p).map_err(|e| Failure::io(e).context(format!("creating {}", p.display())))?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Failure::io(e);
    w.write_record([
        "n",
        "backend",
        "m",
        "u",
        "distance_evaluations",
        "partition_evaluations",
        "wall_ms",
    ])
    .map_err(io)?;
    for &n in &a.sizes {
        let d = synth::clustered(n, a.dims, a.seed);
        let spec = DistanceSpec::from_dataset(&d);
        for (kind, backend) in &backends {
            let start = Instant::now();
            let ns = neighborhoods::build(&spec, backend, a.eps, a.k, a.seed)?;
            let wall = ms(start);
            let parts: Vec<String> = ns.partition_evaluations().iter().map(u64::to_string).collect();
            let uses_m = matches!(kind, BackendKind::Pool | BackendKind::PairSample)
                || (*kind == BackendKind::Partitioned && a.inner != BackendKind::Exact);
            w.write_record([
                n.to_string(),
                kind.to_string(),
                if uses_m { a.m.to_string() } else { String::new() },
                if *kind == BackendKind::Partitioned {
                    a.u.to_string()
                } else {
                    String::new()
                },
                ns.evaluations().to_string(),
                parts.join(";"),
                format!("{wall:.3}"),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(Failure::io)
}
