//! Summaries of finished runs, located by run id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiment::MetricsRow;
use crate::output::{CliError, CliResult, Manifest};

/// Mean and sample standard deviation over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Option<Stat> {
        if xs.is_empty() {
            return None;
        }
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let std = if xs.len() < 2 { 0.0 } else { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt() };
        Some(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    pub n: usize,
    pub lambda: f64,
    pub algo: String,
    pub p: usize,
    pub delta: Option<f64>,
    pub n_meas: u64,
    pub runs: usize,
    pub alpha: Stat,
    pub alpha_mp: Stat,
    pub p_gs: Option<Stat>,
    pub gs_fraction: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub run_id: String,
    pub command: String,
    pub manifest: PathBuf,
    pub failures: usize,
    pub groups: Vec<Group>,
}

/// Manifests in `dir` (not recursive) whose run id is `run_id`.
pub fn find_manifest(dir: &Path, run_id: &str) -> CliResult<(PathBuf, Manifest)> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".manifest.json"))
        .collect();
    paths.sort();
    for path in paths {
        if let Ok(m) = Manifest::load(&path) {
            if m.run_id == run_id {
                return Ok((path, m));
            }
        }
    }
    Err(CliError::data(format!("not found: no manifest with run id {run_id} in {}", dir.display())))
}

fn resolve(dir: &Path, recorded: &Path) -> PathBuf {
    if recorded.exists() {
        return recorded.to_path_buf();
    }
    match recorded.file_name() {
        Some(name) => dir.join(name),
        None => recorded.to_path_buf(),
    }
}

/// `(n, algo, p, n_meas, lambda bits, delta bits)`.
type GroupKey = (usize, String, usize, u64, u64, u64);

/// Groups metrics rows by everything except the repetition seed.
pub fn aggregate(rows: &[MetricsRow]) -> Vec<Group> {
    let mut groups: BTreeMap<GroupKey, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.n, r.algo.clone(), r.p, r.n_meas, r.lambda.to_bits(), r.delta.unwrap_or(f64::NAN).to_bits());
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let col = |f: &dyn Fn(&MetricsRow) -> Option<f64>| -> Vec<f64> { rs.iter().filter_map(|r| f(r)).collect() };
            Group {
                n: rs[0].n,
                lambda: rs[0].lambda,
                algo: rs[0].algo.clone(),
                p: rs[0].p,
                delta: rs[0].delta,
                n_meas: rs[0].n_meas,
                runs: rs.len(),
                alpha: Stat::of(&col(&|r| Some(r.alpha))).expect("non-empty"),
                alpha_mp: Stat::of(&col(&|r| Some(r.alpha_mp))).expect("non-empty"),
                p_gs: Stat::of(&col(&|r| r.p_gs)),
                gs_fraction: Stat::of(&col(&|r| r.gs_fraction)),
            }
        })
        .collect()
}

pub fn read_metrics(path: &Path) -> CliResult<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn summarise(dir: &Path, run_id: &str) -> CliResult<Summary> {
    let (path, m) = find_manifest(dir, run_id)?;
    let groups = match m.output("metrics") {
        Some(csv) => {
            let rows = read_metrics(&resolve(dir, csv))?;
            if rows.iter().any(|r| r.run_id != run_id) {
                return Err(CliError::data("metrics rows carry a different run id than their manifest"));
            }
            aggregate(&rows)
        }
        None => Vec::new(),
    };
    Ok(Summary { run_id: m.run_id, command: m.command, manifest: path, failures: m.failures.len(), groups })
}

fn fmt_stat(s: Option<Stat>) -> String {
    match s {
        Some(s) => format!("{:.6} +- {:.6}", s.mean, s.std),
        None => "-".to_string(),
    }
}

pub fn render(s: &Summary) -> String {
    let mut out = format!("run {} ({}) from {}\n", s.run_id, s.command, s.manifest.display());
    if s.failures > 0 {
        out.push_str(&format!("{} failed run(s) recorded in the manifest\n", s.failures));
    }
    if s.groups.is_empty() {
        out.push_str("no metrics rows\n");
    }
    for g in &s.groups {
        let delta = g.delta.map(|d| format!(" delta={d}")).unwrap_or_default();
        let shots = if g.n_meas > 0 { format!(" shots={}", g.n_meas) } else { " exact".to_string() };
        out.push_str(&format!(
            "{} n={} lambda={} p={}{delta}{shots} runs={}: alpha {} | alpha_mp {} | p_gs {} | gs_fraction {}\n",
            g.algo,
            g.n,
            g.lambda,
            g.p,
            g.runs,
            fmt_stat(Some(g.alpha)),
            fmt_stat(Some(g.alpha_mp)),
            fmt_stat(g.p_gs),
            fmt_stat(g.gs_fraction),
        ));
    }
    out
}
