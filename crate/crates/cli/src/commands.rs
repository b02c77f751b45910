use antq::geometry::{generate_instance, save_sites, BBox};
use antq::ising::ParamOverrides;
use antq::metrics::{
    approx_ratio, fit_linear, max_sites, resource_estimate, resource_formula, Connectivity, ResourceEstimate,
    REFERENCE_GATE_BUDGET, REFERENCE_MAX_SITES_DENSE, REFERENCE_MAX_SITES_SPARSE,
};
use antq::optimizer::{
    delta_sweep, pmin_search, qaa_run, EvalMode, LadderConfig, OptimizerConfig, PminSolver,
};
use antq::statevector::{CostTable, Statevector};
use antq::{rng, QaaConfig, SpinString};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::experiment::load_instance;
use crate::output::{CliError, CliResult, RunContext};

pub fn generate(a: &GenerateArgs, argv: &[String]) -> CliResult<()> {
    let bbox = match (a.bbox, a.side) {
        (Some(BBoxArg([x0, y0, x1, y1])), None) => BBox::new(x0, y0, x1, y1)?,
        (None, Some(side)) => BBox::square(side)?,
        _ => return Err(CliError::usage("bbox: give exactly one of --bbox or --side")),
    };
    let sites = generate_instance(a.n, bbox, a.rmax, a.seed)?;
    save_sites(&sites, &a.out).map_err(|e| CliError::from(e).context(a.out.display()))?;
    let config = json!({ "n": a.n, "bbox": [bbox.x0, bbox.y0, bbox.x1, bbox.y1], "rmax": a.rmax });
    let mut ctx = RunContext::new("generate", argv, config, Vec::new(), json!({ "master": a.seed }));
    ctx.record("sites", &a.out);
    println!("{}", sites.label);
    ctx.finish(&a.out).map(|_| ())
}

#[derive(Debug, Serialize)]
struct ExactSolution {
    n: usize,
    xi: f64,
    lambda: f64,
    n_t: usize,
    h_min: f64,
    gap: f64,
    degeneracy: usize,
    ground_states: Vec<String>,
    mean_degree: f64,
}

pub fn solve_exact(a: &SolveArgs, argv: &[String]) -> CliResult<()> {
    let (inst, rec) = load_instance(&a.instance, a.params.into())?;
    let spec = inst.brute_force()?;
    let sol = ExactSolution {
        n: inst.n(),
        xi: inst.xi(),
        lambda: inst.lambda(),
        n_t: inst.n_t(),
        h_min: spec.h_min,
        gap: spec.gap,
        degeneracy: spec.ground_states.len(),
        ground_states: spec.ground_strings().iter().map(SpinString::to_string).collect(),
        mean_degree: inst.mean_degree(),
    };
    let config = json!({ "xi": a.params.xi, "lambda": a.params.lambda, "n_t": a.params.n_t });
    let mut ctx = RunContext::new("solve-exact", argv, config, vec![rec], json!(null));
    ctx.write_json("solution", &a.out, &sol)?;
    println!("h_min {} gap {} ground {}", sol.h_min, sol.gap, sol.ground_states.join(","));
    ctx.finish(&a.out).map(|_| ())
}

#[derive(Debug, Serialize)]
struct SweepCsvRow<'a> {
    run_id: &'a str,
    n: usize,
    lambda: f64,
    p: usize,
    delta: f64,
    energy: f64,
    alpha: f64,
}

pub fn delta_sweep_cmd(a: &SweepArgs, argv: &[String]) -> CliResult<()> {
    if a.p.0.contains(&0) {
        return Err(CliError::usage("p: depths must be positive"));
    }
    let (inst, rec) = load_instance(&a.instance, a.params.into())?;
    let spec = inst.brute_force()?;
    let table = CostTable::new(&inst)?;
    let rows = delta_sweep(&table, &a.p.0, &a.deltas.0)?;
    let config = json!({ "p": a.p.0, "deltas": a.deltas.0, "xi": a.params.xi, "lambda": a.params.lambda, "n_t": a.params.n_t });
    let mut ctx = RunContext::new("delta-sweep", argv, config, vec![rec], json!(null));
    let run_id = ctx.run_id().to_string();
    let out: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| {
            Ok(SweepCsvRow {
                run_id: &run_id,
                n: inst.n(),
                lambda: inst.lambda(),
                p: r.p,
                delta: r.delta,
                energy: r.energy,
                alpha: approx_ratio(r.energy, spec.h_min)?,
            })
        })
        .collect::<Result<_, antq::Error>>()?;
    ctx.write_csv("sweep", &a.out, &out)?;
    for &p in &a.p.0 {
        if let Some(best) = antq::optimizer::best_delta(&rows, p) {
            println!("p {p}: lowest energy {} at delta {}", best.energy, best.delta);
        }
    }
    ctx.finish(&a.out).map(|_| ())
}

#[derive(Debug, Serialize)]
struct PminRow<'a> {
    run_id: &'a str,
    n: usize,
    lambda: f64,
    solver: &'static str,
    delta: Option<f64>,
    threshold: f64,
    p_min: Option<usize>,
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    run_id: &'a str,
    n: usize,
    lambda: f64,
    p: usize,
    alpha: f64,
}

pub fn pmin(a: &PminArgs, argv: &[String]) -> CliResult<()> {
    if a.instances.is_empty() {
        return Err(CliError::usage("n: empty instance list, pass at least one --instance"));
    }
    if a.pgrid.0.is_empty() || a.pgrid.0.contains(&0) || a.pgrid.0.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage("pgrid: depths must be positive and strictly ascending"));
    }
    if !(a.alpha.is_finite() && a.alpha > 0.0 && a.alpha <= 1.0) {
        return Err(CliError::usage("alpha: threshold must lie in (0, 1]"));
    }
    if a.shots == Some(0) {
        return Err(CliError::usage("shots: must be at least 1"));
    }
    let rs = rng::derive(a.seed, &[rng::REPETITION, 0]);
    let mode = match a.shots {
        None => EvalMode::Exact,
        Some(n_meas) => EvalMode::Shots { n_meas, seed: rs },
    };
    let solver = match a.solver {
        Solver::Qaa => match a.delta {
            Some(delta) if delta.is_finite() && delta > 0.0 => PminSolver::Qaa { delta },
            _ => return Err(CliError::usage("delta: the adiabatic solver needs a finite positive --delta")),
        },
        Solver::Qaoa => PminSolver::Qaoa(LadderConfig {
            p_max: *a.pgrid.0.last().expect("checked"),
            walkers: a.ladder.walkers,
            rho: a.ladder.rho,
            optimizer: OptimizerConfig { max_evals: a.ladder.iters, seed: rs, ..OptimizerConfig::default() },
            mode: match mode {
                EvalMode::Exact => EvalMode::Exact,
                EvalMode::Shots { n_meas, seed } => EvalMode::Shots { n_meas, seed: rng::derive(seed, &[rng::SHOT]) },
            },
        }),
    };
    let overrides: ParamOverrides = a.params.into();
    let mut loaded = Vec::new();
    for path in &a.instances {
        loaded.push(load_instance(path, overrides)?);
    }
    let config = json!({
        "solver": solver, "alpha": a.alpha, "pgrid": a.pgrid.0, "shots": a.shots,
        "xi": a.params.xi, "lambda": a.params.lambda, "n_t": a.params.n_t,
    });
    let records = loaded.iter().map(|(_, r)| r.clone()).collect();
    let mut ctx = RunContext::new("pmin", argv, config, records, json!({ "master": a.seed, "repetition_0": rs }));
    let run_id = ctx.run_id().to_string();

    let mut rows = Vec::new();
    let mut trace = Vec::new();
    for (i, (inst, _)) in loaded.iter().enumerate() {
        let res = inst.brute_force().and_then(|spec| {
            let table = CostTable::new(inst)?;
            pmin_search(&table, &spec, &solver, a.alpha, &a.pgrid.0, mode)
        });
        match res {
            Ok(out) => {
                rows.push(PminRow {
                    run_id: &run_id,
                    n: inst.n(),
                    lambda: inst.lambda(),
                    solver: match a.solver {
                        Solver::Qaa => "qaa",
                        Solver::Qaoa => "qaoa",
                    },
                    delta: a.delta.filter(|_| a.solver == Solver::Qaa),
                    threshold: a.alpha,
                    p_min: out.p_min,
                });
                trace.extend(out.trace.iter().map(|&(p, alpha)| TraceRow {
                    run_id: &run_id,
                    n: inst.n(),
                    lambda: inst.lambda(),
                    p,
                    alpha,
                }));
            }
            Err(e) => {
                let e = CliError::from(e);
                ctx.fail(crate::output::Failure { instance: i, repetition: 0, code: e.code, error: e.msg });
            }
        }
    }
    ctx.write_csv("pmin", &a.out, &rows)?;
    if let Some(path) = &a.trace {
        ctx.write_csv("pmin_trace", path, &trace)?;
    }
    for r in &rows {
        match r.p_min {
            Some(p) => println!("n {}: p_min {p}", r.n),
            None => println!("n {}: threshold not reached on the grid", r.n),
        }
    }
    let reached: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.p_min.map(|p| (r.n as f64, p as f64))).collect();
    if reached.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = reached.into_iter().unzip();
        if let Ok(fit) = fit_linear(&xs, &ys) {
            println!("linear fit p_min = {} n + {}", fit.slope, fit.intercept);
        }
    }
    ctx.finish(&a.out).map(|_| ())
}

#[derive(Debug, Serialize)]
struct ResourceRow {
    n: usize,
    lambda_case: String,
    p: usize,
    g1: usize,
    g2: usize,
    total: usize,
}

impl ResourceRow {
    fn new(case: &str, r: &ResourceEstimate) -> Self {
        ResourceRow { n: r.n, lambda_case: case.to_string(), p: r.p, g1: r.g1, g2: r.g2, total: r.total }
    }
}

pub fn resources(a: &ResourceArgs, argv: &[String]) -> CliResult<()> {
    if a.p.0.is_empty() || a.p.0.contains(&0) {
        return Err(CliError::usage("p: depths must be positive"));
    }
    let conn = match a.lambda_case {
        LambdaCase::Dense => Connectivity::Dense,
        LambdaCase::Sparse => Connectivity::Sparse { mean_degree: a.mean_degree },
    };
    let sizes = a.n.as_ref().map(|g| g.0.clone()).unwrap_or_default();
    if sizes.is_empty() && a.instances.is_empty() {
        return Err(CliError::usage("n: give --n sizes or at least one --instance"));
    }
    let mut rows = Vec::new();
    for &n in &sizes {
        for &p in &a.p.0 {
            rows.push(ResourceRow::new(conn.label(), &resource_formula(n, conn, p)?));
        }
    }
    let mut records = Vec::new();
    for path in &a.instances {
        let (inst, rec) = load_instance(path, a.params.into())?;
        // the penalty couples every pair, so any lambda > 0 is the dense case
        let case = if inst.lambda() != 0.0 { "dense" } else { "sparse" };
        for &p in &a.p.0 {
            rows.push(ResourceRow::new(case, &resource_estimate(&inst, p)?));
        }
        records.push(rec);
    }
    let config = json!({
        "n": sizes, "connectivity": conn, "p": a.p.0, "budget": a.budget,
        "xi": a.params.xi, "lambda": a.params.lambda, "n_t": a.params.n_t,
    });
    let mut ctx = RunContext::new("resources", argv, config, records, json!(null));
    ctx.write_csv("resources", &a.out, &rows)?;
    for &p in &a.p.0 {
        let m = max_sites(a.budget, conn, p)?;
        let line = format!("max_sites budget={} {} p={p}: {m}", a.budget, conn.label());
        let reference = match conn {
            Connectivity::Dense => REFERENCE_MAX_SITES_DENSE,
            Connectivity::Sparse { .. } => REFERENCE_MAX_SITES_SPARSE,
        };
        let sparse_reference = matches!(conn, Connectivity::Sparse { mean_degree } if mean_degree == 5.0);
        let comparable = a.budget == REFERENCE_GATE_BUDGET && p == 1 && (conn == Connectivity::Dense || sparse_reference);
        if comparable {
            let diff = m as i64 - reference as i64;
            println!("{line} (reference figure {reference}, difference {diff:+})");
        } else {
            println!("{line}");
        }
    }
    ctx.finish(&a.out).map(|_| ())
}

#[derive(Debug, Serialize)]
struct CountRow<'a> {
    run_id: &'a str,
    string: String,
    count: u64,
    ratio: f64,
}

pub fn sample(a: &SampleArgs, argv: &[String]) -> CliResult<()> {
    if a.shots == 0 {
        return Err(CliError::usage("shots: must be at least 1"));
    }
    let (inst, mut rec) = load_instance(&a.instance, a.params.into())?;
    let spec = inst.brute_force()?;
    let table = CostTable::new(&inst)?;
    let mut records = Vec::new();
    let state = match (&a.state, a.p, a.delta) {
        (Some(path), None, _) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let s = Statevector::read_dump(bytes.as_slice()).map_err(|e| CliError::from(e).context(path.display()))?;
            if s.n() != inst.n() {
                return Err(CliError::data(format!("state has {} qubits, instance has {} sites", s.n(), inst.n())));
            }
            records.push(crate::output::InstanceRecord {
                path: path.clone(),
                sha256: crate::output::sha256_hex(&bytes),
                n: s.n(),
                lambda: inst.lambda(),
            });
            s
        }
        (None, Some(p), Some(delta)) => qaa_run(&table, QaaConfig::new(p, delta)?, EvalMode::Exact)?.state,
        _ => return Err(CliError::usage("state: give either --state or --p with --delta")),
    };
    let seed = rng::derive(a.seed, &[rng::SAMPLE]);
    let counts = state.sample(a.shots, seed)?;
    rec.lambda = inst.lambda();
    records.insert(0, rec);
    let config = json!({
        "p": a.p, "delta": a.delta, "shots": a.shots,
        "xi": a.params.xi, "lambda": a.params.lambda, "n_t": a.params.n_t,
    });
    let mut ctx = RunContext::new("sample", argv, config, records, json!({ "master": a.seed, "sample": seed }));
    let run_id = ctx.run_id().to_string();
    let mut rows = Vec::new();
    for (&x, &count) in &counts.counts {
        rows.push(CountRow {
            run_id: &run_id,
            string: SpinString::from_index(inst.n(), x)?.to_string(),
            count,
            ratio: approx_ratio(table.value(x), spec.h_min)?,
        });
    }
    rows.sort_by(|l, r| r.count.cmp(&l.count).then_with(|| l.string.cmp(&r.string)));
    ctx.write_csv("counts", &a.out, &rows)?;
    println!("{} distinct strings in {} shots", rows.len(), a.shots);
    ctx.finish(&a.out).map(|_| ())
}
