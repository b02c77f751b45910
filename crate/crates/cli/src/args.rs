use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "antq", version, about = "Antenna-placement Ising instances on an emulated quantum register")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random site file.
    Generate(GenerateArgs),
    /// Exhaustive ground state and gap of an instance.
    SolveExact(SolveArgs),
    /// Linear-ramp adiabatic circuits at fixed depths.
    Qaa(QaaArgs),
    /// Variational depth ladder.
    Qaoa(QaoaArgs),
    /// Adiabatic energy over a grid of time steps.
    DeltaSweep(SweepArgs),
    /// Smallest depth reaching a target approximation ratio.
    Pmin(PminArgs),
    /// Gate counts and largest instance within a budget.
    Resources(ResourceArgs),
    /// Measure a state and write the counts.
    Sample(SampleArgs),
    /// Summarise a finished run.
    Report(ReportArgs),
}

/// A comma list (`1,2,5`) or an inclusive range `start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T>(pub Vec<T>);

impl FromStr for Grid<usize> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((a, b, step)) = split_range(s) {
            let (a, b, step): (usize, usize, usize) = (num(a)?, num(b)?, num(step)?);
            if step == 0 || b < a {
                return Err(format!("bad range {s:?}"));
            }
            return Ok(Grid((a..=b).step_by(step).collect()));
        }
        s.split(',').map(num).collect::<Result<_, _>>().map(Grid)
    }
}

impl FromStr for Grid<f64> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((a, b, step)) = split_range(s) {
            let (a, b, step): (f64, f64, f64) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                return Err(format!("bad range {s:?}"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // rounded so that 0.1:3.0:0.1 yields 0.3, not 0.30000000000000004
            let vals = (0..count).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect();
            return Ok(Grid(vals));
        }
        s.split(',').map(num).collect::<Result<_, _>>().map(Grid)
    }
}

fn split_range(s: &str) -> Option<(&str, &str, &str)> {
    let mut it = s.split(':');
    match (it.next(), it.next(), it.next(), it.next()) {
        (Some(a), Some(b), Some(c), None) => Some((a, b, c)),
        _ => None,
    }
}

fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse {s:?}"))
}

#[derive(Debug, Clone, Copy)]
pub struct BBoxArg(pub [f64; 4]);

impl FromStr for BBoxArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
        <[f64; 4]>::try_from(v).map(BBoxArg).map_err(|_| "bbox needs x0,y0,x1,y1".to_string())
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("region").required(true).args(["bbox", "side"])))]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Bounding box `x0,y0,x1,y1`.
    #[arg(long)]
    pub bbox: Option<BBoxArg>,
    /// Square `[0, side]^2`.
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long)]
    pub rmax: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parameters that override the instance file.
#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "n-t")]
    pub n_t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ShotArgs {
    /// Measurements per state; exact expectation values when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
}

/// Distribution outputs for the deepest circuit of the first instance, repetition 0.
#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Cumulative-probability CSV.
    #[arg(long)]
    pub cp: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    pub cp_points: usize,
    /// Ratio-histogram CSV.
    #[arg(long)]
    pub hist: Option<PathBuf>,
    #[arg(long, default_value_t = antq::metrics::DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    /// Binary state dump.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QaaArgs {
    /// Instance file; repeat for several sizes.
    #[arg(long = "instance")]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub p: Grid<usize>,
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub shots: ShotArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LadderArgs {
    #[arg(long, default_value_t = 32)]
    pub walkers: usize,
    #[arg(long, default_value_t = antq::schedules::DEFAULT_RHO)]
    pub rho: f64,
    /// Objective evaluations per local search.
    #[arg(long, default_value_t = antq::optimizer::DEFAULT_MAX_EVALS)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct QaoaArgs {
    #[arg(long = "instance")]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub pmax: usize,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[command(flatten)]
    pub shots: ShotArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub p: Grid<usize>,
    #[arg(long)]
    pub deltas: Grid<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Qaa,
    Qaoa,
}

#[derive(Debug, Args)]
pub struct PminArgs {
    #[arg(long = "instance")]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub solver: Solver,
    #[arg(long, default_value_t = 0.85)]
    pub alpha: f64,
    #[arg(long)]
    pub pgrid: Grid<usize>,
    /// Time step for the adiabatic solver.
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub ladder: LadderArgs,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-depth ratios.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaCase {
    Dense,
    Sparse,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Formula mode sizes.
    #[arg(long)]
    pub n: Option<Grid<usize>>,
    /// Instance mode: count the interacting pairs of each file.
    #[arg(long = "instance")]
    pub instances: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "dense")]
    pub lambda_case: LambdaCase,
    #[arg(long, default_value_t = 5.0)]
    pub mean_degree: f64,
    #[arg(long, default_value = "1")]
    pub p: Grid<usize>,
    #[arg(long, default_value_t = antq::metrics::REFERENCE_GATE_BUDGET)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["state", "p"])))]
pub struct SampleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    /// State dump to measure.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Adiabatic depth, with `--delta`, when no dump is given.
    #[arg(long, requires = "delta")]
    pub p: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub run_id: String,
    /// Directory searched for manifests.
    #[arg(long, default_value = ".")]
    pub dir: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!("1,2,5".parse::<Grid<usize>>().unwrap().0, vec![1, 2, 5]);
        assert_eq!("10:40:10".parse::<Grid<usize>>().unwrap().0, vec![10, 20, 30, 40]);
        let g = "0.1:3.0:0.1".parse::<Grid<f64>>().unwrap().0;
        assert_eq!(g.len(), 30);
        assert_eq!(g[2], 0.3);
        assert_eq!(g[29], 3.0);
        assert!("5:1:1".parse::<Grid<usize>>().is_err());
        assert!("a,b".parse::<Grid<f64>>().is_err());
    }

    #[test]
    fn bbox() {
        assert_eq!("0,0,2.1,2.1".parse::<BBoxArg>().unwrap().0, [0.0, 0.0, 2.1, 2.1]);
        assert!("0,0,1".parse::<BBoxArg>().is_err());
    }

    #[test]
    fn definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
