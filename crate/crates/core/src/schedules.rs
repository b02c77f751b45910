//! Layer angles: linear adiabatic ramps, INTERP depth extension, walker clouds.
//!
//! Formulas index layers from 1; storage is 0-based (`beta[k - 1]` is layer `k`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

/// Default half-width of a walker hypercube, in radians.
pub const DEFAULT_RHO: f64 = 0.1;

/// Per-layer mixer angles `beta` and phase angles `gamma`.
///
/// `gamma` multiplies energies, so it carries inverse area units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct AngleSchedule {
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSchedule {
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl TryFrom<RawSchedule> for AngleSchedule {
    type Error = crate::Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        AngleSchedule::new(raw.beta, raw.gamma)
    }
}

impl AngleSchedule {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.len() != gamma.len() {
            return Err(invalid(format!("beta has {} layers, gamma has {}", beta.len(), gamma.len())));
        }
        if beta.iter().chain(&gamma).any(|v| !v.is_finite()) {
            return Err(invalid("schedule angles must be finite"));
        }
        Ok(AngleSchedule { beta, gamma })
    }

    pub fn empty() -> Self {
        AngleSchedule { beta: Vec::new(), gamma: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `[beta_1..beta_p, gamma_1..gamma_p]`.
    pub fn to_params(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.gamma).copied().collect()
    }

    pub fn from_params(params: &[f64]) -> Result<Self> {
        if !params.len().is_multiple_of(2) {
            return Err(invalid("parameter vector must have even length"));
        }
        let p = params.len() / 2;
        Self::new(params[..p].to_vec(), params[p..].to_vec())
    }

    /// Angles as applied by an adiabatic run: the driver is `-sum X`, whose
    /// ground state is the plus state, so each mixer layer turns by `-beta_k`.
    pub fn as_driver(&self) -> Self {
        AngleSchedule { beta: self.beta.iter().map(|b| -b).collect(), gamma: self.gamma.clone() }
    }

    /// Same schedule with one more identity layer (`beta = gamma = 0`) at the end.
    pub fn append_zero_layer(&self) -> Self {
        let mut next = self.clone();
        next.beta.push(0.0);
        next.gamma.push(0.0);
        next
    }
}

/// Adiabatic time step and layer count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaaConfig {
    pub p: usize,
    pub delta: f64,
}

impl QaaConfig {
    pub fn new(p: usize, delta: f64) -> Result<Self> {
        if p == 0 {
            return Err(invalid("QAA needs at least one layer"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("time step must be finite and positive, got {delta}")));
        }
        Ok(QaaConfig { p, delta })
    }

    pub fn schedule(&self) -> Result<AngleSchedule> {
        linear_qaa(self.p, self.delta)
    }
}

/// `beta_k = delta (1 - k/p)`, `gamma_k = delta k / p` for `k = 1..=p`.
pub fn linear_qaa(p: usize, delta: f64) -> Result<AngleSchedule> {
    QaaConfig::new(p, delta)?;
    let pf = p as f64;
    let gamma: Vec<f64> = (1..=p).map(|k| delta * k as f64 / pf).collect();
    let beta = (1..=p).map(|k| delta * (1.0 - k as f64 / pf)).collect();
    AngleSchedule::new(beta, gamma)
}

/// INTERP: depth `p` optimum to a depth `p + 1` starting point.
///
/// For each angle family, `t'_k = (k-1)/p t_{k-1} + (p-k+1)/p t_k` for
/// `k = 1..=p+1`, with `t_0 = t_{p+1} = 0`.
pub fn interp_extend(sched: &AngleSchedule) -> Result<AngleSchedule> {
    let p = sched.depth();
    if p == 0 {
        return Err(invalid("INTERP needs a schedule of depth at least 1"));
    }
    let extend = |t: &[f64]| -> Vec<f64> {
        let at = |k: usize| if k == 0 || k > p { 0.0 } else { t[k - 1] };
        let pf = p as f64;
        (1..=p + 1)
            .map(|k| (k - 1) as f64 / pf * at(k - 1) + (p + 1 - k) as f64 / pf * at(k))
            .collect()
    };
    AngleSchedule::new(extend(&sched.beta), extend(&sched.gamma))
}

/// `m` starting points: walker 0 is `center`, the others perturb every angle
/// independently and uniformly within `[-rho, rho]`.
///
/// Walker `w` draws from the [`rng::WALKER`] stream of `seed` at path `[WALKER, w]`.
pub fn walker_cloud(center: &AngleSchedule, rho: f64, m: usize, seed: u64) -> Result<Vec<AngleSchedule>> {
    if m == 0 {
        return Err(invalid("walker count must be at least 1"));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(invalid(format!("walker radius must be finite and non-negative, got {rho}")));
    }
    let mut out = Vec::with_capacity(m);
    out.push(center.clone());
    for w in 1..m {
        let mut r = rng::stream(seed, &[rng::WALKER, w as u64]);
        let mut jitter = |v: &f64| if rho == 0.0 { *v } else { v + r.random_range(-rho..=rho) };
        let beta = center.beta.iter().map(&mut jitter).collect();
        let gamma = center.gamma.iter().map(&mut jitter).collect();
        out.push(AngleSchedule::new(beta, gamma)?);
    }
    Ok(out)
}
