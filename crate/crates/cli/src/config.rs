//! Config-file loading and flag overrides.

use std::collections::BTreeMap;
use std::path::Path;

use rwn_core::{BackendKind, RwnConfig};
use serde::Deserialize;

use crate::args::ParamArgs;
use crate::{CliResult, Failure};

pub const SEED_ENV: &str = "RWN_SEED";

/// The JSON config file: the keys of [`RwnConfig`], all optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub q: Option<f64>,
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub m: Option<usize>,
    pub u: Option<usize>,
    pub inner: Option<BackendKind>,
    pub fresh_pool_per_point: Option<bool>,
    pub weights: Option<BTreeMap<String, f64>>,
}

impl From<RwnConfig> for ConfigFile {
    fn from(c: RwnConfig) -> Self {
        Self {
            eps: Some(c.eps),
            k: Some(c.k),
            q: Some(c.q),
            seed: Some(c.seed),
            backend: Some(c.backend),
            m: c.m,
            u: c.u,
            inner: c.inner,
            fresh_pool_per_point: Some(c.fresh_pool_per_point),
            weights: Some(c.weights),
        }
    }
}

pub fn read_config_file(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(e).context(format!("reading config {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("config {}: {e}", path.display())))
}

fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::config(format!("seed: {SEED_ENV}=`{s}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Resolved parameters plus every ε given on the command line.
#[derive(Debug)]
pub struct Resolved {
    pub config: RwnConfig,
    pub eps_list: Vec<f64>,
}

/// Merge flags over `base` (a config file or manifest) over defaults. The
/// seed comes from the flag, then the file, then `RWN_SEED`; when
/// `require_seed` is false a missing seed becomes 0.
pub fn resolve(params: &ParamArgs, base: Option<ConfigFile>, require_seed: bool) -> CliResult<Resolved> {
    let file = match &params.config {
        Some(path) => read_config_file(path)?,
        None => base.unwrap_or_default(),
    };
    let defaults = RwnConfig::default();
    let seed = match params.seed.or(file.seed) {
        Some(s) => s,
        None => match env_seed()? {
            Some(s) => s,
            None if require_seed => {
                return Err(Failure::config(format!(
                    "seed: not given by --seed, the config file or {SEED_ENV}"
                )))
            }
            None => 0,
        },
    };
    let mut weights = file.weights.unwrap_or_default();
    for (name, w) in &params.weights {
        weights.insert(name.clone(), *w);
    }
    let config = RwnConfig {
        eps: params.eps.first().copied().or(file.eps).unwrap_or(defaults.eps),
        k: params.k.or(file.k).unwrap_or(defaults.k),
        q: params.q.or(file.q).unwrap_or(defaults.q),
        seed,
        backend: params.backend.or(file.backend).unwrap_or(defaults.backend),
        m: params.m.or(file.m),
        u: params.u.or(file.u),
        inner: params.inner.or(file.inner),
        fresh_pool_per_point: params.fresh_pool_per_point || file.fresh_pool_per_point.unwrap_or(false),
        weights,
    };
    config.validate()?;
    let eps_list = if params.eps.is_empty() {
        vec![config.eps]
    } else {
        params.eps.clone()
    };
    for &e in &eps_list {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Failure::config(format!("eps: {e} must be finite and >= 0")));
        }
    }
    Ok(Resolved { config, eps_list })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"eps": 0.5, "k": 7, "q": 0.25, "seed": 3, "weights": {"a": 2.0}}"#,
        )
        .unwrap();
        let params = ParamArgs {
            config: Some(path),
            k: Some(4),
            weights: vec![("b".into(), 0.5)],
            ..ParamArgs::default()
        };
        let r = resolve(&params, None, true).unwrap();
        assert_eq!((r.config.eps, r.config.k, r.config.q, r.config.seed), (0.5, 4, 0.25, 3));
        assert_eq!(r.config.weights.len(), 2);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"epsilon": 0.5}"#).unwrap();
        let params = ParamArgs {
            config: Some(path),
            ..ParamArgs::default()
        };
        assert_eq!(
            resolve(&params, None, false).unwrap_err().kind,
            crate::FailureKind::Config
        );
        let params = ParamArgs {
            q: Some(1.5),
            seed: Some(1),
            ..ParamArgs::default()
        };
        let err = resolve(&params, None, true).unwrap_err();
        assert_eq!(err.kind, crate::FailureKind::Config);
        assert!(err.to_string().contains('q'));
    }

    #[test]
    fn missing_config_file_is_io() {
        let params = ParamArgs {
            config: Some("/nonexistent/rwn.json".into()),
            ..ParamArgs::default()
        };
        assert_eq!(resolve(&params, None, false).unwrap_err().kind, crate::FailureKind::Io);
    }
}
