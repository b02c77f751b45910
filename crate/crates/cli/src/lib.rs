//! Command-line harness over the `antq` library.
//!
//! Every command that computes writes its outputs plus a
//! `<out>.manifest.json` sidecar. CSV rows carry the manifest's run id, which
//! hashes the canonical configuration and the instance file contents, so a
//! rerun with the same inputs reproduces the CSVs byte for byte.

pub mod args;
pub mod commands;
pub mod experiment;
pub mod output;
pub mod report;

use args::{Cli, Command};
use experiment::{Algo, ExperimentConfig};
pub use output::{CliError, CliResult};

/// Worker threads for the parallel kernels.
pub const THREADS_ENV: &str = "ANTQ_THREADS";

pub(crate) fn thread_setting() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Applies `ANTQ_THREADS` to the global pool.
pub fn configure_threads() -> CliResult<()> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{THREADS_ENV}: expected a positive integer, got {v:?}")))?;
            antq::kernels::configure_threads(n).map_err(|e| CliError::usage(format!("{THREADS_ENV}: {e}")))
        }
    }
}

/// Runs one parsed command. `argv` is recorded in the manifest.
pub fn run(cli: Cli, argv: &[String]) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a, argv),
        Command::SolveExact(a) => commands::solve_exact(&a, argv),
        Command::Qaa(a) => {
            let cfg = ExperimentConfig {
                algo: Algo::Qaa,
                instances: a.instances,
                xi: a.params.xi,
                lambda: a.params.lambda,
                n_t: a.params.n_t,
                p: a.p.0,
                delta: Some(a.delta),
                n_meas: a.shots.shots,
                repetitions: a.shots.repetitions,
                walkers: 1,
                rho: 0.0,
                iters: 1,
                seed: a.shots.seed,
            };
            experiment::run_batch(&cfg, &a.dist, &a.out, argv)
        }
        Command::Qaoa(a) => {
            let cfg = ExperimentConfig {
                algo: Algo::Qaoa,
                instances: a.instances,
                xi: a.params.xi,
                lambda: a.params.lambda,
                n_t: a.params.n_t,
                p: vec![a.pmax],
                delta: None,
                n_meas: a.shots.shots,
                repetitions: a.shots.repetitions,
                walkers: a.ladder.walkers,
                rho: a.ladder.rho,
                iters: a.ladder.iters,
                seed: a.shots.seed,
            };
            experiment::run_batch(&cfg, &a.dist, &a.out, argv)
        }
        Command::DeltaSweep(a) => commands::delta_sweep_cmd(&a, argv),
        Command::Pmin(a) => commands::pmin(&a, argv),
        Command::Resources(a) => commands::resources(&a, argv),
        Command::Sample(a) => commands::sample(&a, argv),
        Command::Report(a) => {
            let s = report::summarise(&a.dir, &a.run_id)?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                print!("{}", report::render(&s));
            }
            Ok(())
        }
    }
}
