//! Solution-quality metrics, scaling fits and gate budgets.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ising::{lexicographic_key, IsingInstance, Spectrum};
use crate::statevector::{CostTable, ShotCounts, Statevector};

/// Histogram bin width for approximation ratios.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

/// Gate budget of the reference utility-scale experiment.
pub const REFERENCE_GATE_BUDGET: usize = 2880;

/// Reported largest fully connected instance for [`REFERENCE_GATE_BUDGET`] at depth 1.
pub const REFERENCE_MAX_SITES_DENSE: usize = 75;

/// Reported largest sparse instance for [`REFERENCE_GATE_BUDGET`] at depth 1.
pub const REFERENCE_MAX_SITES_SPARSE: usize = 425;

/// `<H> / H_min`.
pub fn approx_ratio(h_exp: f64, h_min: f64) -> Result<f64> {
    if h_min == 0.0 || !h_min.is_finite() {
        return Err(Error::Degenerate(format!("ground energy {h_min} cannot normalise a ratio")));
    }
    Ok(h_exp / h_min)
}

/// A probability distribution over basis strings: an exact state or shot counts.
#[derive(Debug, Clone, Copy)]
pub enum Distribution<'a> {
    State(&'a Statevector),
    Counts(&'a ShotCounts),
}

impl Distribution<'_> {
    pub fn n(&self) -> usize {
        match self {
            Distribution::State(s) => s.n(),
            Distribution::Counts(c) => c.n,
        }
    }

    /// `(index, probability)` over the support, ascending index.
    pub fn for_each(&self, mut f: impl FnMut(u64, f64)) {
        match self {
            Distribution::State(s) => {
                for (x, a) in s.amplitudes().iter().enumerate() {
                    f(x as u64, a.norm_sqr());
                }
            }
            Distribution::Counts(c) => {
                let total = c.n_meas as f64;
                for (&x, &k) in &c.counts {
                    f(x, k as f64 / total);
                }
            }
        }
    }

    /// Most probable (or most frequent) string, lexicographic tie-break.
    pub fn mode(&self) -> u64 {
        match self {
            Distribution::State(s) => s.most_probable(),
            Distribution::Counts(c) => c.most_frequent(),
        }
    }
}

/// `H(z_MP) / H_min`.
pub fn approx_ratio_mp(dist: Distribution<'_>, inst: &IsingInstance, h_min: f64) -> Result<f64> {
    if dist.n() != inst.n() {
        return Err(invalid("distribution and instance sizes differ"));
    }
    approx_ratio(inst.cost_index(dist.mode()), h_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricMode {
    Exact,
    Shots { n_meas: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub alpha: f64,
    pub alpha_mp: f64,
    /// Exact ground-state probability when a state is available.
    pub p_gs: Option<f64>,
    /// `N_gs / N_meas` in shot mode.
    pub gs_counts_fraction: Option<f64>,
    pub mode: MetricMode,
}

pub fn exact_report(state: &Statevector, table: &CostTable, spectrum: &Spectrum) -> Result<MetricsReport> {
    let alpha = approx_ratio(state.expectation(table)?, spectrum.h_min)?;
    let alpha_mp = approx_ratio_mp(Distribution::State(state), table.instance(), spectrum.h_min)?;
    Ok(MetricsReport {
        alpha,
        alpha_mp,
        p_gs: Some(state.ground_probability(spectrum)?),
        gs_counts_fraction: None,
        mode: MetricMode::Exact,
    })
}

/// Finite-shot estimators: mean-estimator ratio, most-frequent ratio and the
/// counted ground fraction (summed over every ground string).
pub fn shot_estimators(counts: &ShotCounts, table: &CostTable, spectrum: &Spectrum) -> Result<MetricsReport> {
    if counts.n != table.n() || spectrum.n != table.n() {
        return Err(invalid("counts, instance and spectrum sizes differ"));
    }
    let alpha = approx_ratio(counts.mean_cost(table), spectrum.h_min)?;
    let alpha_mp = approx_ratio_mp(Distribution::Counts(counts), table.instance(), spectrum.h_min)?;
    let gs: u64 = spectrum.ground_states.iter().map(|x| counts.counts.get(x).copied().unwrap_or(0)).sum();
    Ok(MetricsReport {
        alpha,
        alpha_mp,
        p_gs: None,
        gs_counts_fraction: Some(gs as f64 / counts.n_meas as f64),
        mode: MetricMode::Shots { n_meas: counts.n_meas },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

/// `CP(a) = sum over strings with ratio >= a of their probability`.
pub fn cumulative_probability(
    dist: Distribution<'_>,
    table: &CostTable,
    spectrum: &Spectrum,
    thresholds: &[f64],
) -> Result<CpCurve> {
    if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("thresholds must be finite and strictly ascending"));
    }
    let mut mass = vec![0.0; thresholds.len()];
    let mut err = None;
    dist.for_each(|x, p| {
        if p == 0.0 {
            return;
        }
        match approx_ratio(table.value(x), spectrum.h_min) {
            // thresholds[..k] are all <= ratio
            Ok(r) => {
                let k = thresholds.partition_point(|&t| t <= r);
                if k > 0 {
                    mass[k - 1] += p;
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    // suffix sums give CP at each threshold
    let mut values = vec![0.0; thresholds.len()];
    let mut acc = 0.0;
    for k in (0..thresholds.len()).rev() {
        acc += mass[k];
        values[k] = acc;
    }
    Ok(CpCurve { thresholds: thresholds.to_vec(), values })
}

/// `count` evenly spaced thresholds from `lo` to `hi` inclusive.
pub fn threshold_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistBin {
    /// Bin `[lo, lo + width)`, `lo = k * width`.
    pub lo: f64,
    pub mass: f64,
}

/// Probability mass per ratio bin, ascending, empty bins omitted.
pub fn ratio_histogram(
    dist: Distribution<'_>,
    table: &CostTable,
    spectrum: &Spectrum,
    bin_width: f64,
) -> Result<Vec<HistBin>> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(invalid("bin width must be finite and positive"));
    }
    let mut bins = std::collections::BTreeMap::<i64, f64>::new();
    let mut err = None;
    dist.for_each(|x, p| {
        if p == 0.0 {
            return;
        }
        match approx_ratio(table.value(x), spectrum.h_min) {
            Ok(r) => *bins.entry((r / bin_width).floor() as i64).or_insert(0.0) += p,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(bins.into_iter().map(|(k, mass)| HistBin { lo: k as f64 * bin_width, mass }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    /// `y ~ prefactor * base^x`.
    pub base: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("a line fit needs at least two (x, y) pairs"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("fit data must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit abscissae are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}

/// Least squares on `ln y` versus `x`.
pub fn fit_exponential(sizes: &[f64], values: &[f64]) -> Result<ExpFit> {
    if values.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(invalid("exponential fit needs strictly positive values"));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = fit_linear(sizes, &logs)?;
    Ok(ExpFit { base: line.slope.exp(), prefactor: line.intercept.exp() })
}

/// How two-qubit interactions per layer are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Connectivity {
    /// Full connectivity: `n (n - 1) / 2` pairs.
    Dense,
    /// `round(mean_degree * n)` interactions, the sparse-case estimate.
    Sparse { mean_degree: f64 },
}

impl Connectivity {
    pub fn label(&self) -> &'static str {
        match self {
            Connectivity::Dense => "dense",
            Connectivity::Sparse { .. } => "sparse",
        }
    }

    pub fn two_qubit_per_layer(&self, n: usize) -> usize {
        match *self {
            Connectivity::Dense => n * n.saturating_sub(1) / 2,
            Connectivity::Sparse { mean_degree } => (mean_degree * n as f64).round() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceEstimate {
    pub n: usize,
    pub p: usize,
    pub g1_per_layer: usize,
    pub g2_per_layer: usize,
    pub g1: usize,
    pub g2: usize,
    pub total: usize,
}

impl ResourceEstimate {
    fn new(n: usize, p: usize, g2_per_layer: usize) -> Self {
        let g1_per_layer = 2 * n;
        let g1 = g1_per_layer * p;
        let g2 = g2_per_layer * p;
        ResourceEstimate { n, p, g1_per_layer, g2_per_layer, g1, g2, total: g1 + g2 }
    }
}

/// Exact counts for an instance: one interaction per nonzero reduced coupling.
pub fn resource_estimate(inst: &IsingInstance, p: usize) -> Result<ResourceEstimate> {
    if p == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    Ok(ResourceEstimate::new(inst.n(), p, inst.interacting_pairs()))
}

/// Formula counts from a connectivity model.
pub fn resource_formula(n: usize, conn: Connectivity, p: usize) -> Result<ResourceEstimate> {
    if p == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    if let Connectivity::Sparse { mean_degree } = conn {
        if !(mean_degree.is_finite() && mean_degree >= 0.0) {
            return Err(invalid("mean degree must be finite and non-negative"));
        }
    }
    Ok(ResourceEstimate::new(n, p, conn.two_qubit_per_layer(n)))
}

/// Largest `n` whose depth-`p` circuit fits in `budget` gates.
pub fn max_sites(budget: usize, conn: Connectivity, p: usize) -> Result<usize> {
    let fits = |n: usize| resource_formula(n, conn, p).map(|r| r.total <= budget);
    if !fits(1)? {
        return Ok(0);
    }
    // gate counts grow monotonically in n
    let mut lo = 1;
    let mut hi = 2;
    while fits(hi)? {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return Err(invalid("budget too large to bracket"));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest depth for `n` sites within `budget`; zero when a single layer does not fit.
pub fn max_depth(budget: usize, n: usize, conn: Connectivity) -> Result<usize> {
    let per_layer = resource_formula(n, conn, 1)?.total;
    Ok(budget.checked_div(per_layer).unwrap_or(usize::MAX))
}

/// Ranking key used when reporting strings in lexicographic order.
pub fn string_order(n: usize, x: u64) -> u64 {
    lexicographic_key(n, x)
}
