//! Angle optimisation and fixed-schedule runs.
//!
//! Local search is COBYLA (the NLopt translation in the `cobyla` crate) wrapped
//! so that the best point ever evaluated is returned; in exact mode the result
//! is therefore never worse than the start. The depth ladder grows QAOA one
//! layer at a time from INTERP starting points explored by a walker cloud.

use std::cell::{Cell, RefCell};
use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ising::Spectrum;
use crate::kernels;
use crate::metrics::approx_ratio;
use crate::rng;
use crate::schedules::{interp_extend, linear_qaa, walker_cloud, AngleSchedule, QaaConfig, DEFAULT_RHO};
use crate::statevector::{run_circuit, CostTable, ShotCounts, Statevector};

/// Objective evaluations per local search.
pub const DEFAULT_MAX_EVALS: usize = 50;

/// Grid resolution per angle for the depth-1 start.
pub const START_GRID: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    /// Mean estimator over `n_meas` shots; evaluation `k` samples with seed
    /// `derive(seed, [SHOT, k])`.
    Shots { n_meas: u64, seed: u64 },
}

impl EvalMode {
    pub fn n_meas(&self) -> Option<u64> {
        match self {
            EvalMode::Exact => None,
            EvalMode::Shots { n_meas, .. } => Some(*n_meas),
        }
    }
}

/// The QAOA energy as a function of the angles. Counts its evaluations.
pub struct Objective<'a> {
    table: &'a CostTable,
    mode: EvalMode,
    evals: Cell<usize>,
}

impl<'a> Objective<'a> {
    pub fn new(table: &'a CostTable, mode: EvalMode) -> Self {
        Objective { table, mode, evals: Cell::new(0) }
    }

    pub fn evaluate(&self, sched: &AngleSchedule) -> Result<f64> {
        let k = self.evals.get();
        self.evals.set(k + 1);
        let state = run_circuit(self.table, sched)?;
        match self.mode {
            EvalMode::Exact => state.expectation(self.table),
            EvalMode::Shots { n_meas, seed } => {
                let counts = state.sample(n_meas, rng::derive(seed, &[rng::SHOT, k as u64]))?;
                Ok(counts.mean_cost(self.table))
            }
        }
    }

    pub fn evals(&self) -> usize {
        self.evals.get()
    }

    pub fn table(&self) -> &CostTable {
        self.table
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    /// Absolute stopping tolerance on every angle.
    pub tolerance: f64,
    /// Initial COBYLA step.
    pub step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { max_evals: DEFAULT_MAX_EVALS, tolerance: 1e-6, step: 0.1, seed: 0 }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(invalid("max_evals must be at least 1"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid("initial step must be finite and positive"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(invalid("tolerance must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalResult {
    pub schedule: AngleSchedule,
    pub value: f64,
    pub start_value: f64,
    pub evals: usize,
}

/// Derivative-free local minimisation over a flat parameter vector.
///
/// Returns the best evaluated point; the first evaluation is `start`.
pub fn minimize_params(
    f: impl Fn(&[f64]) -> Result<f64>,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    cfg.validate()?;
    if start.iter().any(|v| !v.is_finite()) {
        return Err(invalid("start point must be finite"));
    }
    if start.is_empty() {
        let v = f(start)?;
        return Ok((Vec::new(), v, v, 1));
    }
    let best: RefCell<Option<(Vec<f64>, f64)>> = RefCell::new(None);
    let first: Cell<Option<f64>> = Cell::new(None);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = Cell::new(0usize);
    let wrapped = |x: &[f64], _: &mut ()| -> f64 {
        // Infinite values stall the solver's trust-region step; a flat
        // finite surface lets it run out of evaluations instead.
        if failure.borrow().is_some() || evals.get() >= cfg.max_evals {
            return first.get().unwrap_or(0.0);
        }
        evals.set(evals.get() + 1);
        match f(x) {
            Ok(v) => {
                if first.get().is_none() {
                    first.set(Some(v));
                }
                let mut b = best.borrow_mut();
                if b.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    *b = Some((x.to_vec(), v));
                }
                v
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                first.get().unwrap_or(0.0)
            }
        }
    };
    let dim = start.len();
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); dim];
    let cons: Vec<&dyn cobyla::Func<()>> = Vec::new();
    let tols = cobyla::StopTols { xtol_abs: vec![cfg.tolerance; dim], ..Default::default() };
    // The status is irrelevant: the wrapper keeps the best point seen.
    let _ = cobyla::minimize(wrapped, start, &bounds, &cons, (), cfg.max_evals, cobyla::RhoBeg::All(cfg.step), Some(tols));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (x, v) = best.into_inner().ok_or_else(|| Error::Optimizer("no objective evaluation took place".into()))?;
    let start_value = first.get().expect("first evaluation recorded");
    Ok((x, v, start_value, evals.get()))
}

pub fn minimize_local(obj: &Objective<'_>, start: &AngleSchedule, cfg: &OptimizerConfig) -> Result<LocalResult> {
    let (x, value, start_value, evals) =
        minimize_params(|x| obj.evaluate(&AngleSchedule::from_params(x)?), &start.to_params(), cfg)?;
    let schedule = if x.is_empty() { start.clone() } else { AngleSchedule::from_params(&x)? };
    Ok(LocalResult { schedule, value, start_value, evals })
}

/// Walker clouds draw from `optimizer.seed`; in shot mode every candidate
/// samples from `derive(mode seed, [SHOT, p, candidate])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderConfig {
    pub p_max: usize,
    pub walkers: usize,
    pub rho: f64,
    pub optimizer: OptimizerConfig,
    pub mode: EvalMode,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            p_max: 10,
            walkers: 32,
            rho: DEFAULT_RHO,
            optimizer: OptimizerConfig::default(),
            mode: EvalMode::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthRecord {
    pub p: usize,
    pub schedule: AngleSchedule,
    /// Best objective value (exact or shot estimate).
    pub value: f64,
    /// Exact `<H>` of `schedule`.
    pub energy: f64,
    /// `energy / h_min`, when the ground energy was supplied.
    pub alpha: Option<f64>,
    /// Winning candidate: `0..walkers` around the INTERP point (0 is the point
    /// itself), `walkers` is the previous optimum with a zero layer appended.
    pub walker: usize,
    pub start_value: f64,
    pub evals: usize,
    pub total_evals: usize,
    /// `max_evals * p`.
    pub p_tot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthLadderResult {
    pub grid_start: AngleSchedule,
    pub records: Vec<DepthRecord>,
}

impl DepthLadderResult {
    pub fn at(&self, p: usize) -> Option<&DepthRecord> {
        self.records.iter().find(|r| r.p == p)
    }
}

/// Best depth-1 start on a `START_GRID x START_GRID` grid of cell midpoints in
/// `[0, pi/2]^2`. Ties go to the first grid point in `(beta, gamma)` order.
pub fn grid_start(obj: &Objective<'_>) -> Result<AngleSchedule> {
    let step = FRAC_PI_2 / START_GRID as f64;
    let mut best: Option<(AngleSchedule, f64)> = None;
    for i in 0..START_GRID {
        for j in 0..START_GRID {
            let s = AngleSchedule::new(vec![(i as f64 + 0.5) * step], vec![(j as f64 + 0.5) * step])?;
            let v = obj.evaluate(&s)?;
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((s, v));
            }
        }
    }
    Ok(best.expect("grid is non-empty").0)
}

/// QAOA depth ladder `p = 1..=p_max`.
pub fn qaoa_ladder(table: &CostTable, h_min: Option<f64>, cfg: &LadderConfig) -> Result<DepthLadderResult> {
    if cfg.p_max == 0 {
        return Err(invalid("p_max must be at least 1"));
    }
    if cfg.walkers == 0 {
        return Err(invalid("walker count must be at least 1"));
    }
    cfg.optimizer.validate()?;
    let seed = cfg.optimizer.seed;
    let mode_for = |p: usize, candidate: usize| match cfg.mode {
        EvalMode::Exact => EvalMode::Exact,
        EvalMode::Shots { n_meas, seed: shots } => {
            EvalMode::Shots { n_meas, seed: rng::derive(shots, &[rng::SHOT, p as u64, candidate as u64]) }
        }
    };
    let grid = grid_start(&Objective::new(table, mode_for(0, 0)))?;

    let mut records: Vec<DepthRecord> = Vec::with_capacity(cfg.p_max);
    for p in 1..=cfg.p_max {
        let center = match records.last() {
            None => grid.clone(),
            Some(prev) => interp_extend(&prev.schedule)?,
        };
        let mut starts = walker_cloud(&center, cfg.rho, cfg.walkers, rng::derive(seed, &[rng::WALKER, p as u64]))?;
        if let Some(prev) = records.last() {
            starts.push(prev.schedule.append_zero_layer());
        }
        let results = kernels::map_tasks(&starts, |c, start| {
            let obj = Objective::new(table, mode_for(p, c));
            minimize_local(&obj, start, &cfg.optimizer)
        });
        let mut winner: Option<(usize, LocalResult)> = None;
        let mut total_evals = 0;
        for (c, r) in results.into_iter().enumerate() {
            let r = r?;
            total_evals += r.evals;
            if winner.as_ref().is_none_or(|(_, w)| r.value < w.value) {
                winner = Some((c, r));
            }
        }
        let (walker, best) = winner.expect("at least one candidate");
        let energy = match cfg.mode {
            EvalMode::Exact => best.value,
            EvalMode::Shots { .. } => run_circuit(table, &best.schedule)?.expectation(table)?,
        };
        let alpha = h_min.map(|h| approx_ratio(energy, h)).transpose()?;
        records.push(DepthRecord {
            p,
            schedule: best.schedule,
            value: best.value,
            energy,
            alpha,
            walker,
            start_value: best.start_value,
            evals: best.evals,
            total_evals,
            p_tot: cfg.optimizer.max_evals * p,
        });
    }
    Ok(DepthLadderResult { grid_start: grid, records })
}

#[derive(Debug, Clone)]
pub struct QaaOutcome {
    pub schedule: AngleSchedule,
    pub state: Statevector,
    /// Exact `<H>`.
    pub energy: f64,
    /// `energy` in exact mode, the shot mean estimator otherwise.
    pub estimate: f64,
    pub counts: Option<ShotCounts>,
}

/// One fixed-schedule adiabatic circuit.
///
/// `schedule` in the outcome is the linear ramp; the circuit applies
/// [`AngleSchedule::as_driver`] of it.
pub fn qaa_run(table: &CostTable, cfg: QaaConfig, mode: EvalMode) -> Result<QaaOutcome> {
    let cfg = QaaConfig::new(cfg.p, cfg.delta)?;
    let schedule = linear_qaa(cfg.p, cfg.delta)?;
    let state = run_circuit(table, &schedule.as_driver())?;
    let energy = state.expectation(table)?;
    let (estimate, counts) = match mode {
        EvalMode::Exact => (energy, None),
        EvalMode::Shots { n_meas, seed } => {
            let counts = state.sample(n_meas, seed)?;
            (counts.mean_cost(table), Some(counts))
        }
    };
    Ok(QaaOutcome { schedule, state, energy, estimate, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: usize,
    pub delta: f64,
    pub energy: f64,
}

/// Exact QAA energy on every `(p, delta)` pair, `p`-major.
pub fn delta_sweep(table: &CostTable, ps: &[usize], deltas: &[f64]) -> Result<Vec<SweepRow>> {
    if ps.is_empty() || deltas.is_empty() {
        return Err(invalid("delta sweep needs at least one depth and one time step"));
    }
    let pairs: Vec<(usize, f64)> = ps.iter().flat_map(|&p| deltas.iter().map(move |&d| (p, d))).collect();
    kernels::map_tasks(&pairs, |_, &(p, delta)| {
        let out = qaa_run(table, QaaConfig::new(p, delta)?, EvalMode::Exact)?;
        Ok(SweepRow { p, delta, energy: out.energy })
    })
    .into_iter()
    .collect()
}

/// Time step with the lowest energy at depth `p`; ties go to the earlier row.
pub fn best_delta(rows: &[SweepRow], p: usize) -> Option<SweepRow> {
    rows.iter().filter(|r| r.p == p).fold(None, |best: Option<SweepRow>, r| match best {
        Some(b) if b.energy <= r.energy => Some(b),
        _ => Some(*r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum PminSolver {
    Qaa { delta: f64 },
    Qaoa(LadderConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PminOutcome {
    pub p_min: Option<usize>,
    /// `(p, alpha)` for every grid depth evaluated, ascending.
    pub trace: Vec<(usize, f64)>,
}

/// Smallest grid depth whose approximation ratio reaches `threshold`.
///
/// In shot mode the ratio is the mean estimator from `n_meas` shots of the
/// final state, sampled with `derive(seed, [SAMPLE, p])`.
pub fn pmin_search(
    table: &CostTable,
    spectrum: &Spectrum,
    solver: &PminSolver,
    threshold: f64,
    p_grid: &[usize],
    mode: EvalMode,
) -> Result<PminOutcome> {
    if p_grid.is_empty() || p_grid[0] == 0 || p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("depth grid must be non-empty, positive and strictly ascending"));
    }
    if !threshold.is_finite() {
        return Err(invalid("threshold must be finite"));
    }
    let ratio_of = |p: usize, state: &Statevector| -> Result<f64> {
        let energy = match mode {
            EvalMode::Exact => state.expectation(table)?,
            EvalMode::Shots { n_meas, seed } => {
                state.sample(n_meas, rng::derive(seed, &[rng::SAMPLE, p as u64]))?.mean_cost(table)
            }
        };
        approx_ratio(energy, spectrum.h_min)
    };
    let mut trace = Vec::new();
    match solver {
        PminSolver::Qaa { delta } => {
            for &p in p_grid {
                let out = qaa_run(table, QaaConfig::new(p, *delta)?, EvalMode::Exact)?;
                let a = ratio_of(p, &out.state)?;
                trace.push((p, a));
                if a >= threshold {
                    return Ok(PminOutcome { p_min: Some(p), trace });
                }
            }
        }
        PminSolver::Qaoa(cfg) => {
            let cfg = LadderConfig { p_max: *p_grid.last().expect("non-empty"), ..*cfg };
            let ladder = qaoa_ladder(table, Some(spectrum.h_min), &cfg)?;
            for &p in p_grid {
                let rec = ladder.at(p).expect("ladder covers the grid");
                let a = ratio_of(p, &run_circuit(table, &rec.schedule)?)?;
                trace.push((p, a));
                if a >= threshold {
                    return Ok(PminOutcome { p_min: Some(p), trace });
                }
            }
        }
    }
    Ok(PminOutcome { p_min: None, trace })
}
