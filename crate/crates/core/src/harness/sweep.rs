use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{parse_value, set_path, Config};
use super::run::{execute, load_with_overrides, write_artifacts, Overrides, MANIFEST_HEADER};
use super::{csv_string, write_file, HarnessError};

/// One row of the sweep manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub index: usize,
    pub label: String,
    pub hash: String,
    pub dir: String,
    pub status: String,
    pub stop: String,
}

/// Parses `path=v1,v2,...` or `path=[v1, v2]` into a path and its values.
pub fn parse_param(arg: &str) -> Result<(String, Vec<toml::Value>), HarnessError> {
    let (path, list) =
        arg.split_once('=').ok_or_else(|| HarnessError::Config(format!("--param {arg}: expected <path>=<list>")))?;
    let (path, list) = (path.trim(), list.trim());
    if path.is_empty() || list.is_empty() {
        return Err(HarnessError::Config(format!("--param {arg}: expected <path>=<list>")));
    }
    let values = match parse_value(list) {
        toml::Value::Array(items) if list.starts_with('[') => items,
        _ => list.split(',').map(|s| parse_value(s.trim())).collect(),
    };
    Ok((path.to_string(), values))
}

fn render(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Cartesian product of the parameter lists; the last parameter varies fastest.
fn grid(params: &[(String, Vec<toml::Value>)]) -> Vec<Vec<(String, toml::Value)>> {
    let mut out = vec![Vec::new()];
    for (path, values) in params {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<(String, toml::Value)>| {
                values.iter().map(move |v| {
                    let mut row = prefix.clone();
                    row.push((path.clone(), v.clone()));
                    row
                })
            })
            .collect();
    }
    out
}

/// `sweep <config> --param <path>=<list>...`: runs every grid point on a worker
/// pool, each in its own `run_NNNN` directory, and writes one manifest in grid order.
pub fn cmd_sweep(path: &Path, params: &[String], ov: &Overrides) -> Result<Vec<SweepEntry>, HarnessError> {
    if params.is_empty() {
        return Err(HarnessError::Config("sweep: at least one --param is required".into()));
    }
    let parsed = params.iter().map(|p| parse_param(p)).collect::<Result<Vec<_>, _>>()?;
    let base = load_with_overrides(path, ov)?;
    let out = ov.out_dir(&base);

    let mut configs = Vec::new();
    for (k, point) in grid(&parsed).into_iter().enumerate() {
        let mut table = base.to_table()?;
        for (p, v) in &point {
            set_path(&mut table, p, v.clone())?;
        }
        let mut cfg = Config::from_table(table)?;
        cfg.base_dir = base.base_dir.clone();
        // fail fast on any invalid grid point before launching runs
        cfg.build()?;
        let label = point.iter().map(|(p, v)| format!("{p}={}", render(v))).collect::<Vec<_>>().join(";");
        configs.push((k + 1, label, cfg));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ov.workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    let entries: Vec<SweepEntry> = pool.install(|| {
        configs.par_iter().map(|(index, label, cfg)| sweep_one(*index, label, cfg, &out)).collect::<Result<Vec<_>, _>>()
    })?;

    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![e.index.to_string(), e.label.clone(), e.hash.clone(), e.dir.clone(), e.status.clone(), e.stop.clone()]
        })
        .collect();
    write_file(&out.join("manifest"), &csv_string(&MANIFEST_HEADER, &rows)?)?;
    Ok(entries)
}

fn sweep_one(index: usize, label: &str, cfg: &Config, out: &Path) -> Result<SweepEntry, HarnessError> {
    let name = format!("run_{index:04}");
    let dir: PathBuf = out.join(&name);
    write_file(&dir.join("config.toml"), &cfg.to_toml()?)?;
    let hash = cfg.hash()?;
    let exp = cfg.build()?;
    let (status, stop) = match execute(&exp) {
        Ok(rec) => {
            write_artifacts(&rec, &dir)?;
            ("ok".to_string(), rec.trajectory.stop.label())
        }
        Err(HarnessError::Solver(e)) => (format!("solver_error: {e}"), String::new()),
        Err(e) => return Err(e),
    };
    Ok(SweepEntry { index, label: label.to_string(), hash, dir: name, status, stop })
}
