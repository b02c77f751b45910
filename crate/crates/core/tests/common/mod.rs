//! Independent oracles and golden fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use antq::geometry::{load_sites, Site, SiteSet};
use antq::IsingInstance;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub const XI: f64 = 0.25;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden_sites(n: usize) -> SiteSet {
    load_sites(fixture(&format!("golden_{n:02}.json"))).unwrap()
}

pub fn golden(n: usize, lambda: f64) -> IsingInstance {
    IsingInstance::from_sites(&golden_sites(n), XI, lambda, n / 2).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct GoldenSpectrum {
    pub n: usize,
    pub lambda: f64,
    pub h_min: f64,
    pub gap: f64,
    pub ground_states: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct GoldenValues {
    pub spectra: Vec<GoldenSpectrum>,
    pub overlaps_30: Vec<f64>,
    pub mean_degree_30: f64,
}

pub fn golden_values() -> GoldenValues {
    serde_json::from_str(&std::fs::read_to_string(fixture("golden_values.json")).unwrap()).unwrap()
}

/// Hit-or-miss estimate of the intersection area over the rectangle that
/// bounds it; centers are rotated onto the x axis.
pub fn mc_lens_area(a: &Site, b: &Site, points: usize, seed: u64) -> f64 {
    let d = a.distance(b);
    let (ra, rb) = (a.r, b.r);
    let x0 = (-ra).max(d - rb);
    let x1 = ra.min(d + rb);
    if x1 <= x0 {
        return 0.0;
    }
    let h = ra.min(rb);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..points {
        let x = rng.random_range(x0..x1);
        let y = rng.random_range(-h..h);
        if x * x + y * y <= ra * ra && (x - d) * (x - d) + y * y <= rb * rb {
            hits += 1;
        }
    }
    hits as f64 / points as f64 * (x1 - x0) * 2.0 * h
}

/// Spins of basis index `x`: bit i set means site i active, `z_i = +1`.
pub fn spins(n: usize, x: u64) -> Vec<f64> {
    (0..n).map(|i| if x >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

/// Cost written term by term over ordered pairs.
pub fn cost_oracle(inst: &IsingInstance, x: u64) -> f64 {
    let n = inst.n();
    let z = spins(n, x);
    let dnt = n as f64 - 2.0 * inst.n_t() as f64;
    let mut overlap = 0.0;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                overlap += z[i] * inst.overlap(i, j) * z[j];
                pairs += z[i] * z[j];
            }
        }
    }
    let coverage: f64 = (0..n).map(|i| inst.area(i) * z[i]).sum();
    let field: f64 = z.iter().sum();
    overlap - inst.xi() * coverage + inst.lambda() * (pairs + dnt * field)
}

pub fn oracle_min(inst: &IsingInstance) -> f64 {
    (0..1u64 << inst.n()).map(|x| cost_oracle(inst, x)).fold(f64::INFINITY, f64::min)
}

type Mat = Vec<Vec<Complex64>>;

fn identity(dim: usize) -> Mat {
    (0..dim).map(|r| (0..dim).map(|c| if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect()).collect()
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// One-qubit operator `op` on qubit `q` of `n`; qubit q is bit q of the index.
fn on_qubit(n: usize, q: usize, op: &Mat) -> Mat {
    let id = identity(2);
    // kron builds big-endian, so the highest qubit goes first
    let mut m = vec![vec![Complex64::new(1.0, 0.0)]];
    for k in (0..n).rev() {
        m = kron(&m, if k == q { op } else { &id });
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn apply(m: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn add_scaled(a: &Mat, ca: Complex64, b: &Mat, cb: Complex64) -> Mat {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| ca * x + cb * y).collect()).collect()
}

/// Circuit assembled from ZZ, Z and X rotation gates as dense matrices.
///
/// Spins are `z = -Z`, so `z_i z_j = Z_i Z_j` and `z_i = -Z_i`. The couplings
/// are rebuilt from the raw overlaps: `J_ij + lambda` per ordered pair and
/// `lambda dN_t - xi A_i` per site.
pub fn gate_circuit(inst: &IsingInstance, beta: &[f64], gamma: &[f64]) -> Vec<Complex64> {
    let n = inst.n();
    let dim = 1usize << n;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i_ = Complex64::new(0.0, 1.0);
    let pz: Mat = vec![vec![one, zero], vec![zero, -one]];
    let px: Mat = vec![vec![zero, one], vec![one, zero]];
    let id = identity(dim);
    let dnt = n as f64 - 2.0 * inst.n_t() as f64;
    let mut state = vec![Complex64::new((dim as f64).powf(-0.5), 0.0); dim];
    for (&b, &g) in beta.iter().zip(gamma) {
        let mut u = identity(dim);
        for i in 0..n {
            for j in i + 1..n {
                // both orderings contribute
                let theta = g * 2.0 * (inst.overlap(i, j) + inst.lambda());
                let zz = matmul(&on_qubit(n, i, &pz), &on_qubit(n, j, &pz));
                u = matmul(&add_scaled(&id, Complex64::new(theta.cos(), 0.0), &zz, -i_ * theta.sin()), &u);
            }
        }
        for i in 0..n {
            let field = inst.lambda() * dnt - inst.xi() * inst.area(i);
            // exp(-i g f z) = exp(+i g f Z)
            let theta = g * field;
            let z = on_qubit(n, i, &pz);
            u = matmul(&add_scaled(&id, Complex64::new(theta.cos(), 0.0), &z, i_ * theta.sin()), &u);
        }
        for q in 0..n {
            let x = on_qubit(n, q, &px);
            u = matmul(&add_scaled(&id, Complex64::new(b.cos(), 0.0), &x, -i_ * b.sin()), &u);
        }
        state = apply(&u, &state);
    }
    state
}

/// `sum over x with H(x)/H_min >= a of p(x)`, string by string.
pub fn cp_oracle(probs: &[f64], costs: &[f64], h_min: f64, a: f64) -> f64 {
    probs.iter().zip(costs).filter(|(_, c)| *c / h_min >= a).map(|(p, _)| p).sum()
}

pub fn histogram_oracle(probs: &[f64], costs: &[f64], h_min: f64, width: f64) -> std::collections::BTreeMap<i64, f64> {
    let mut out = std::collections::BTreeMap::new();
    for (p, c) in probs.iter().zip(costs) {
        if *p > 0.0 {
            *out.entry((c / h_min / width).floor() as i64).or_insert(0.0) += p;
        }
    }
    out
}

pub fn random_instance(n: usize, lambda: f64, seed: u64) -> IsingInstance {
    use antq::geometry::{generate_instance, BBox};
    let side = 2.1 * (n as f64 / 30.0).sqrt();
    let sites = generate_instance(n, BBox::square(side).unwrap(), 0.5, seed).unwrap();
    IsingInstance::from_sites(&sites, XI, lambda, n / 2).unwrap()
}
