//! Batched solver runs over instances and seed repetitions.
//!
//! Repetition `r` of master seed `s` uses `rs = derive(s, [REPETITION, r])`.
//! From it: walker clouds use `rs` directly, shot-mode objective evaluations
//! use `derive(rs, [SHOT])` as the ladder's mode seed, and the final
//! measurement at depth `p` uses `derive(rs, [SAMPLE, p])`.

use std::path::{Path, PathBuf};

use antq::ising::{InstanceFile, ParamOverrides};
use antq::metrics::{
    cumulative_probability, exact_report, ratio_histogram, shot_estimators, threshold_grid, Distribution,
    MetricsReport,
};
use antq::optimizer::{qaa_run, qaoa_ladder, EvalMode, LadderConfig, OptimizerConfig};
use antq::statevector::{run_circuit, CostTable, Statevector};
use antq::{kernels, rng, IsingInstance, QaaConfig, Spectrum};
use serde::Serialize;

use crate::args::{DistArgs, ParamArgs};
use crate::output::{sha256_hex, CliError, CliResult, Failure, InstanceRecord, RunContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Qaa,
    Qaoa,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Qaa => "qaa",
            Algo::Qaoa => "qaoa",
        }
    }
}

/// Everything that determines the numbers of a qaa/qaoa batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub algo: Algo,
    #[serde(skip)]
    pub instances: Vec<PathBuf>,
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub n_t: Option<usize>,
    /// Depths for qaa; `[p_max]` for qaoa.
    pub p: Vec<usize>,
    pub delta: Option<f64>,
    pub n_meas: Option<u64>,
    pub repetitions: usize,
    pub walkers: usize,
    pub rho: f64,
    pub iters: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, why: &str| Err(CliError::usage(format!("{field}: {why}")));
        if self.instances.is_empty() {
            return bad("n", "empty instance list, pass at least one --instance");
        }
        if self.p.is_empty() || self.p.contains(&0) {
            return bad("p", "depths must be a non-empty list of positive integers");
        }
        if self.algo == Algo::Qaoa && self.p.len() != 1 {
            return bad("pmax", "the ladder takes a single maximum depth");
        }
        if self.algo == Algo::Qaa && !self.delta.is_some_and(|d| d.is_finite() && d > 0.0) {
            return bad("delta", "must be finite and positive");
        }
        if self.n_meas == Some(0) {
            return bad("shots", "must be at least 1");
        }
        if self.repetitions == 0 {
            return bad("repetitions", "must be at least 1");
        }
        if self.walkers == 0 {
            return bad("walkers", "must be at least 1");
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return bad("rho", "must be finite and non-negative");
        }
        if self.iters == 0 {
            return bad("iters", "must be at least 1");
        }
        for (field, v) in [("xi", self.xi), ("lambda", self.lambda)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return bad(field, "must be finite");
            }
        }
        Ok(())
    }

    pub fn overrides(&self) -> ParamOverrides {
        ParamOverrides { xi: self.xi, lambda: self.lambda, n_t: self.n_t }
    }

    pub fn repetition_seed(&self, r: usize) -> u64 {
        rng::derive(self.seed, &[rng::REPETITION, r as u64])
    }

    fn eval_mode(&self, rep_seed: u64) -> EvalMode {
        match self.n_meas {
            None => EvalMode::Exact,
            Some(n_meas) => EvalMode::Shots { n_meas, seed: rng::derive(rep_seed, &[rng::SHOT]) },
        }
    }
}

impl From<ParamArgs> for ParamOverrides {
    fn from(a: ParamArgs) -> Self {
        ParamOverrides { xi: a.xi, lambda: a.lambda, n_t: a.n_t }
    }
}

/// One line of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub n: usize,
    pub lambda: f64,
    pub algo: String,
    pub p: usize,
    pub delta: Option<f64>,
    pub n_meas: u64,
    pub seed: u64,
    pub alpha: f64,
    pub alpha_mp: f64,
    pub p_gs: Option<f64>,
    pub gs_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpRow<'a> {
    pub run_id: &'a str,
    pub threshold: f64,
    pub cp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistRow<'a> {
    pub run_id: &'a str,
    pub bin_lo: f64,
    pub mass: f64,
}

/// Reads and hashes an instance file.
pub fn load_instance(path: &Path, overrides: ParamOverrides) -> CliResult<(IsingInstance, InstanceRecord)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let file = InstanceFile::parse(&text).map_err(|e| CliError::from(e).context(path.display()))?;
    let inst = file.build(overrides).map_err(|e| CliError::from(e).context(path.display()))?;
    let rec = InstanceRecord { path: path.to_path_buf(), sha256: sha256_hex(&bytes), n: inst.n(), lambda: inst.lambda() };
    Ok((inst, rec))
}

struct Prepared {
    inst: IsingInstance,
    table: CostTable,
    spectrum: Spectrum,
}

fn prepare(inst: IsingInstance) -> CliResult<Prepared> {
    let spectrum = inst.brute_force()?;
    let table = CostTable::new(&inst)?;
    Ok(Prepared { inst, table, spectrum })
}

struct Trial {
    rows: Vec<MetricsRow>,
    /// Deepest state and its sampled counts, for distribution outputs.
    last: Option<(Statevector, Option<antq::ShotCounts>)>,
}

fn report_for(state: &Statevector, counts: Option<&antq::ShotCounts>, prep: &Prepared) -> CliResult<MetricsReport> {
    Ok(match counts {
        None => exact_report(state, &prep.table, &prep.spectrum)?,
        Some(c) => MetricsReport {
            p_gs: Some(state.ground_probability(&prep.spectrum)?),
            ..shot_estimators(c, &prep.table, &prep.spectrum)?
        },
    })
}

fn row(cfg: &ExperimentConfig, prep: &Prepared, p: usize, seed: u64, rep: &MetricsReport) -> MetricsRow {
    MetricsRow {
        run_id: String::new(),
        n: prep.inst.n(),
        lambda: prep.inst.lambda(),
        algo: cfg.algo.name().to_string(),
        p,
        delta: cfg.delta.filter(|_| cfg.algo == Algo::Qaa),
        n_meas: cfg.n_meas.unwrap_or(0),
        seed,
        alpha: rep.alpha,
        alpha_mp: rep.alpha_mp,
        p_gs: rep.p_gs,
        gs_fraction: rep.gs_counts_fraction,
    }
}

fn trial(cfg: &ExperimentConfig, prep: &Prepared, r: usize, keep_last: bool) -> CliResult<Trial> {
    let rs = cfg.repetition_seed(r);
    let measure = |state: &Statevector, p: usize| -> CliResult<Option<antq::ShotCounts>> {
        match cfg.n_meas {
            None => Ok(None),
            Some(n) => Ok(Some(state.sample(n, rng::derive(rs, &[rng::SAMPLE, p as u64]))?)),
        }
    };
    let mut rows = Vec::new();
    let mut last = None;
    match cfg.algo {
        Algo::Qaa => {
            let delta = cfg.delta.expect("validated");
            let p_max = *cfg.p.iter().max().expect("validated");
            for &p in &cfg.p {
                let out = qaa_run(&prep.table, QaaConfig::new(p, delta)?, EvalMode::Exact)?;
                let counts = measure(&out.state, p)?;
                rows.push(row(cfg, prep, p, rs, &report_for(&out.state, counts.as_ref(), prep)?));
                if keep_last && p == p_max && last.is_none() {
                    last = Some((out.state, counts));
                }
            }
        }
        Algo::Qaoa => {
            let ladder_cfg = LadderConfig {
                p_max: cfg.p[0],
                walkers: cfg.walkers,
                rho: cfg.rho,
                optimizer: OptimizerConfig { max_evals: cfg.iters, seed: rs, ..OptimizerConfig::default() },
                mode: cfg.eval_mode(rs),
            };
            let ladder = qaoa_ladder(&prep.table, Some(prep.spectrum.h_min), &ladder_cfg)?;
            for rec in &ladder.records {
                let state = run_circuit(&prep.table, &rec.schedule)?;
                let counts = measure(&state, rec.p)?;
                rows.push(row(cfg, prep, rec.p, rs, &report_for(&state, counts.as_ref(), prep)?));
                if keep_last && rec.p == ladder_cfg.p_max {
                    last = Some((state, counts));
                }
            }
        }
    }
    Ok(Trial { rows, last })
}

/// Runs the batch, writes the metrics CSV (and distribution outputs when
/// requested) and the manifest.
pub fn run_batch(cfg: &ExperimentConfig, dist: &DistArgs, out: &Path, argv: &[String]) -> CliResult<()> {
    cfg.validate()?;
    if dist.cp.is_some() && dist.cp_points < 2 {
        return Err(CliError::usage("cp-points: need at least 2 thresholds"));
    }
    let mut loaded = Vec::new();
    for path in &cfg.instances {
        loaded.push(load_instance(path, cfg.overrides())?);
    }
    let records = loaded.iter().map(|(_, r)| r.clone()).collect();
    let seeds = serde_json::json!({
        "master": cfg.seed,
        "repetitions": (0..cfg.repetitions).map(|r| cfg.repetition_seed(r)).collect::<Vec<_>>(),
    });
    let mut ctx = RunContext::new(cfg.algo.name(), argv, serde_json::to_value(cfg)?, records, seeds);

    let prepared: Vec<CliResult<Prepared>> = loaded.into_iter().map(|(inst, _)| prepare(inst)).collect();
    let tasks: Vec<(usize, usize)> =
        (0..prepared.len()).flat_map(|i| (0..cfg.repetitions).map(move |r| (i, r))).collect();
    let want_dist = dist.cp.is_some() || dist.hist.is_some() || dist.dump.is_some();
    let results = kernels::map_tasks(&tasks, |_, &(i, r)| match &prepared[i] {
        Ok(prep) => trial(cfg, prep, r, want_dist && i == 0 && r == 0),
        Err(e) => Err(e.clone()),
    });

    let mut rows = Vec::new();
    let mut first = None;
    for (&(i, r), res) in tasks.iter().zip(results) {
        match res {
            Ok(t) => {
                rows.extend(t.rows.into_iter().map(|row| (i, r, row)));
                if t.last.is_some() {
                    first = t.last;
                }
            }
            Err(e) => ctx.fail(Failure { instance: i, repetition: r, code: e.code, error: e.msg }),
        }
    }
    rows.sort_by_key(|&(i, r, ref row)| (i, r, row.p));
    let run_id = ctx.run_id().to_string();
    let rows: Vec<MetricsRow> = rows.into_iter().map(|(_, _, row)| MetricsRow { run_id: run_id.clone(), ..row }).collect();
    ctx.write_csv("metrics", out, &rows)?;

    if let (Some((state, counts)), Ok(prep)) = (&first, &prepared[0]) {
        let d = match counts {
            Some(c) => Distribution::Counts(c),
            None => Distribution::State(state),
        };
        if let Some(path) = &dist.cp {
            let curve = cumulative_probability(d, &prep.table, &prep.spectrum, &threshold_grid(0.0, 1.0, dist.cp_points))?;
            let rows: Vec<CpRow> = curve
                .thresholds
                .iter()
                .zip(&curve.values)
                .map(|(&threshold, &cp)| CpRow { run_id: &run_id, threshold, cp })
                .collect();
            ctx.write_csv("cp", path, &rows)?;
        }
        if let Some(path) = &dist.hist {
            let bins = ratio_histogram(d, &prep.table, &prep.spectrum, dist.bin_width)?;
            let rows: Vec<HistRow> =
                bins.iter().map(|b| HistRow { run_id: &run_id, bin_lo: b.lo, mass: b.mass }).collect();
            ctx.write_csv("histogram", path, &rows)?;
        }
        if let Some(path) = &dist.dump {
            state.save_dump(path)?;
            ctx.record("state", path);
        }
    }
    ctx.finish(out).map(|_| ())
}
