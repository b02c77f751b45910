//! Exact emulation of the alternating phase/mixer circuit.
//!
//! The cost operator is diagonal in the computational basis, so a phase layer
//! is an elementwise multiply by `exp(-i gamma H(x))` and a mixer layer is a
//! single-qubit X rotation on every qubit. Amplitude `x` carries bit `i` of `x`
//! as site `i`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::ising::{lexicographic_key, IsingInstance, SpinString, Spectrum};
use crate::kernels;
use crate::rng;
use crate::schedules::AngleSchedule;

/// Largest register the emulator allocates (2^30 amplitudes, 16 GiB).
pub const MAX_QUBITS: usize = 30;

/// Up to this size the cost of every basis string is tabulated.
pub const DENSE_TABLE_MAX: usize = 26;

const DUMP_MAGIC: &[u8; 8] = b"ANTQSV01";

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amp: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("a register needs at least one qubit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!("{n} qubits exceeds the emulator cap of {MAX_QUBITS}")));
    }
    Ok(())
}

impl Statevector {
    /// `|+>^n`.
    pub fn plus_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(Statevector { n, amp: vec![Complex64::new(a, 0.0); 1 << n] })
    }

    pub fn basis_state(n: usize, x: u64) -> Result<Self> {
        check_qubits(n)?;
        if x >> n != 0 {
            return Err(invalid(format!("basis index {x} out of range for {n} qubits")));
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[x as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amp })
    }

    /// Wraps raw amplitudes without renormalising.
    pub fn from_amplitudes(amp: Vec<Complex64>) -> Result<Self> {
        if !amp.len().is_power_of_two() || amp.len() < 2 {
            return Err(invalid(format!("{} amplitudes is not 2^n with n >= 1", amp.len())));
        }
        let n = amp.len().trailing_zeros() as usize;
        check_qubits(n)?;
        Ok(Statevector { n, amp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        kernels::pairwise_sum(self.amp.len(), &|x| self.amp[x].norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `amp_x <- amp_x exp(-i gamma H(x))`.
    pub fn apply_phase(&mut self, table: &CostTable, gamma: f64) -> Result<()> {
        if table.n() != self.n {
            return Err(invalid(format!("cost table for {} sites on a {}-qubit state", table.n(), self.n)));
        }
        if gamma == 0.0 {
            return Ok(());
        }
        match &table.values {
            Some(values) => kernels::phase(&mut self.amp, values, gamma),
            None => kernels::phase_with(&mut self.amp, |x| table.instance.cost_index(x), gamma),
        }
        Ok(())
    }

    /// `exp(-i beta sum_j X_j)`.
    pub fn apply_mixer(&mut self, beta: f64) {
        if beta != 0.0 {
            kernels::mixer(&mut self.amp, beta);
        }
    }

    /// `sum_x |amp_x|^2 H(x)`, pairwise summed.
    pub fn expectation(&self, table: &CostTable) -> Result<f64> {
        if table.n() != self.n {
            return Err(invalid("cost table and state sizes differ"));
        }
        Ok(kernels::pairwise_sum(self.amp.len(), &|x| self.amp[x].norm_sqr() * table.value(x as u64)))
    }

    pub fn probability_of(&self, z: &SpinString) -> Result<f64> {
        if z.len() != self.n {
            return Err(invalid("spin string length differs from the register size"));
        }
        Ok(self.amp[z.index() as usize].norm_sqr())
    }

    /// Total probability of every ground string.
    pub fn ground_probability(&self, spectrum: &Spectrum) -> Result<f64> {
        if spectrum.n != self.n {
            return Err(invalid("spectrum and state sizes differ"));
        }
        Ok(spectrum.ground_states.iter().map(|&x| self.amp[x as usize].norm_sqr()).sum())
    }

    /// Most probable basis index; ties go to the lexicographically smallest string.
    pub fn most_probable(&self) -> u64 {
        let mut best = 0u64;
        let mut best_p = f64::NEG_INFINITY;
        for (x, a) in self.amp.iter().enumerate() {
            let p = a.norm_sqr();
            let x = x as u64;
            if p > best_p || (p == best_p && lexicographic_key(self.n, x) < lexicographic_key(self.n, best)) {
                best = x;
                best_p = p;
            }
        }
        best
    }

    /// `n_meas` i.i.d. draws from `|amp|^2` on the [`rng::SAMPLE`] stream of `seed`.
    pub fn sample(&self, n_meas: u64, seed: u64) -> Result<ShotCounts> {
        if n_meas == 0 {
            return Err(invalid("n_meas must be at least 1"));
        }
        let mut cdf = Vec::with_capacity(self.amp.len());
        let mut acc = 0.0;
        for a in &self.amp {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = rng::stream(seed, &[rng::SAMPLE]);
        let mut counts = BTreeMap::new();
        for _ in 0..n_meas {
            let u = rng.random::<f64>() * total;
            // first index whose cumulative mass exceeds u, skipping zero-probability states
            let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *counts.entry(x as u64).or_insert(0) += 1;
        }
        Ok(ShotCounts { n: self.n, counts, n_meas })
    }

    /// 16-byte header (`ANTQSV01`, `n` as little-endian u64) then `2^n`
    /// little-endian `(re, im)` f64 pairs.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.amp.len() * 16);
        for a in &self.amp {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != DUMP_MAGIC {
            return Err(Error::Parse("state dump: bad magic".into()));
        }
        let n = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
        check_qubits(n).map_err(|e| Error::Parse(format!("state dump: {e}")))?;
        let mut buf = vec![0u8; 16 << n];
        r.read_exact(&mut buf)?;
        let amp = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Ok(Statevector { n, amp })
    }

    pub fn save_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }
}

/// Cost of every basis string, tabulated or evaluated on demand.
#[derive(Debug, Clone)]
pub struct CostTable {
    instance: IsingInstance,
    values: Option<Vec<f64>>,
}

impl CostTable {
    /// Dense up to [`DENSE_TABLE_MAX`] sites, virtual above.
    pub fn new(instance: &IsingInstance) -> Result<Self> {
        if instance.n() <= DENSE_TABLE_MAX {
            Self::dense(instance)
        } else {
            Self::virtual_table(instance)
        }
    }

    pub fn dense(instance: &IsingInstance) -> Result<Self> {
        check_qubits(instance.n())?;
        let values = kernels::fill(instance.n(), |x| instance.cost_index(x));
        Ok(CostTable { instance: instance.clone(), values: Some(values) })
    }

    /// No storage; every lookup re-evaluates the cost.
    pub fn virtual_table(instance: &IsingInstance) -> Result<Self> {
        check_qubits(instance.n())?;
        Ok(CostTable { instance: instance.clone(), values: None })
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn instance(&self) -> &IsingInstance {
        &self.instance
    }

    pub fn is_dense(&self) -> bool {
        self.values.is_some()
    }

    pub fn value(&self, x: u64) -> f64 {
        match &self.values {
            Some(v) => v[x as usize],
            None => self.instance.cost_index(x),
        }
    }
}

/// Apply `sched` to `|+>^n`, phase layer first within every layer.
pub fn run_circuit(table: &CostTable, sched: &AngleSchedule) -> Result<Statevector> {
    let mut state = Statevector::plus_state(table.n())?;
    evolve(&mut state, table, sched)?;
    Ok(state)
}

pub fn evolve(state: &mut Statevector, table: &CostTable, sched: &AngleSchedule) -> Result<()> {
    for (&beta, &gamma) in sched.beta().iter().zip(sched.gamma()) {
        state.apply_phase(table, gamma)?;
        state.apply_mixer(beta);
    }
    Ok(())
}

/// Measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotCounts {
    pub n: usize,
    pub counts: BTreeMap<u64, u64>,
    pub n_meas: u64,
}

impl ShotCounts {
    pub fn new(n: usize, counts: BTreeMap<u64, u64>) -> Result<Self> {
        let n_meas: u64 = counts.values().sum();
        if n_meas == 0 {
            return Err(invalid("shot counts are empty"));
        }
        if counts.keys().any(|&x| x >> n != 0) {
            return Err(invalid("a counted string does not fit the register"));
        }
        Ok(ShotCounts { n, counts, n_meas })
    }

    pub fn frequency(&self, x: u64) -> f64 {
        self.counts.get(&x).copied().unwrap_or(0) as f64 / self.n_meas as f64
    }

    /// Most frequent string; ties go to the lexicographically smallest string.
    pub fn most_frequent(&self) -> u64 {
        let mut best: Option<(u64, u64)> = None;
        for (&x, &c) in &self.counts {
            best = match best {
                None => Some((x, c)),
                Some((bx, bc)) if c > bc || (c == bc && lexicographic_key(self.n, x) < lexicographic_key(self.n, bx)) => {
                    Some((x, c))
                }
                keep => keep,
            };
        }
        best.expect("non-empty counts").0
    }

    /// Mean estimator `sum_k H(z_k) / n_meas`.
    pub fn mean_cost(&self, table: &CostTable) -> f64 {
        let total: f64 = self.counts.iter().map(|(&x, &c)| c as f64 * table.value(x)).sum();
        total / self.n_meas as f64
    }

    /// Sample standard deviation of `H(z_k)` over the shots.
    pub fn cost_std(&self, table: &CostTable) -> f64 {
        if self.n_meas < 2 {
            return 0.0;
        }
        let mean = self.mean_cost(table);
        let ss: f64 = self.counts.iter().map(|(&x, &c)| c as f64 * (table.value(x) - mean).powi(2)).sum();
        (ss / (self.n_meas - 1) as f64).sqrt()
    }

    /// Total-variation distance to an exact distribution.
    pub fn tv_distance(&self, probs: &[f64]) -> f64 {
        let mut d = 0.0;
        for (x, &p) in probs.iter().enumerate() {
            d += (self.frequency(x as u64) - p).abs();
        }
        0.5 * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_instance, BBox};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn instance(n: usize, lambda: f64, seed: u64) -> IsingInstance {
        let sites = generate_instance(n, BBox::square(2.5).unwrap(), 1.0, seed).unwrap();
        IsingInstance::from_sites(&sites, 0.25, lambda, n / 2).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn plus_state_amplitudes() {
        let s = Statevector::plus_state(1).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(*a, Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-16)));
        let s = Statevector::plus_state(2).unwrap();
        assert!(s.amplitudes().iter().all(|a| *a == Complex64::new(0.5, 0.0)));
        for n in 1..=12 {
            assert!((Statevector::plus_state(n).unwrap().norm_sqr() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(Statevector::plus_state(MAX_QUBITS + 1), Err(Error::ResourceLimit(_))));
        assert!(Statevector::plus_state(0).is_err());
    }

    #[test]
    fn phase_on_one_qubit() {
        // H(b=0) = +a, H(b=1) = -a
        let a = 0.7;
        let inst = IsingInstance::from_parts(vec![0.0], vec![a / 0.25], 0.25, 0.0, 0).unwrap();
        let table = CostTable::new(&inst).unwrap();
        assert!((table.value(0) - a).abs() < 1e-15);
        assert!((table.value(1) + a).abs() < 1e-15);
        let gamma = 0.9;
        let mut s = Statevector::plus_state(1).unwrap();
        s.apply_phase(&table, gamma).unwrap();
        let amp = s.amplitudes();
        assert!(close(amp[0], Complex64::cis(-gamma * a) * FRAC_1_SQRT_2, 1e-15));
        assert!(close(amp[1], Complex64::cis(gamma * a) * FRAC_1_SQRT_2, 1e-15));
        let before = s.clone();
        s.apply_phase(&table, 0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn mixer_full_rotation() {
        let mut s = Statevector::basis_state(1, 0).unwrap();
        s.apply_mixer(FRAC_PI_2);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0), 1e-16));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0), 1e-16));
        let before = s.clone();
        s.apply_mixer(0.0);
        assert_eq!(s, before);
    }

    #[test]
    fn norm_preserved_on_random_state() {
        let inst = instance(8, 1.0, 3);
        let table = CostTable::new(&inst).unwrap();
        let amp: Vec<Complex64> = (0..256).map(|x| Complex64::new((x as f64).sin(), (2.0 * x as f64).cos())).collect();
        let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut s = Statevector::from_amplitudes(amp.into_iter().map(|a| a / norm).collect()).unwrap();
        let n0 = s.norm_sqr();
        s.apply_phase(&table, 0.37).unwrap();
        assert!((s.norm_sqr() - n0).abs() < 1e-12);
        s.apply_mixer(1.1);
        assert!((s.norm_sqr() - n0).abs() < 1e-12);
    }

    #[test]
    fn expectation_identities() {
        let inst = instance(6, 1.0, 5);
        let table = CostTable::new(&inst).unwrap();
        let plus = Statevector::plus_state(6).unwrap();
        assert!(plus.expectation(&table).unwrap().abs() < 1e-10);
        let b = Statevector::basis_state(6, 37).unwrap();
        assert_eq!(b.expectation(&table).unwrap(), inst.cost_index(37));
    }

    #[test]
    fn virtual_table_matches_dense() {
        let inst = instance(7, 1.0, 9);
        let dense = CostTable::dense(&inst).unwrap();
        let virt = CostTable::virtual_table(&inst).unwrap();
        assert!(!virt.is_dense());
        let sched = AngleSchedule::new(vec![0.3, 0.1], vec![0.2, 0.5]).unwrap();
        assert_eq!(run_circuit(&dense, &sched).unwrap(), run_circuit(&virt, &sched).unwrap());
    }

    #[test]
    fn probabilities_of_simple_states() {
        let plus = Statevector::plus_state(3).unwrap();
        let z: SpinString = "101".parse().unwrap();
        assert!((plus.probability_of(&z).unwrap() - 0.125).abs() < 1e-16);
        let b = Statevector::basis_state(3, z.index()).unwrap();
        assert_eq!(b.probability_of(&z).unwrap(), 1.0);
    }

    #[test]
    fn sampling_contracts() {
        let b = Statevector::basis_state(4, 9).unwrap();
        let c = b.sample(1000, 1).unwrap();
        assert_eq!(c.counts, BTreeMap::from([(9, 1000)]));
        let plus = Statevector::plus_state(4).unwrap();
        assert_eq!(plus.sample(500, 77).unwrap(), plus.sample(500, 77).unwrap());
        assert_ne!(plus.sample(500, 77).unwrap(), plus.sample(500, 78).unwrap());
        assert!(plus.sample(0, 1).is_err());
        let c = plus.sample(321, 5).unwrap();
        assert_eq!(c.counts.values().sum::<u64>(), 321);
    }

    #[test]
    fn plus_state_frequencies_concentrate() {
        // 6 sigma of a binomial(1e6, 1/4) frequency is 0.0026; require 0.002
        let plus = Statevector::plus_state(2).unwrap();
        let c = plus.sample(1_000_000, 2024).unwrap();
        for x in 0..4 {
            assert!((c.frequency(x) - 0.25).abs() < 0.002, "{x}: {}", c.frequency(x));
        }
    }

    #[test]
    fn most_probable_tie_break() {
        let plus = Statevector::plus_state(3).unwrap();
        assert_eq!(plus.most_probable(), 0);
        let c = ShotCounts::new(3, BTreeMap::from([(0b001, 5), (0b100, 5), (0b010, 1)])).unwrap();
        // "100" (site 0 active, index 1) sorts after "001" (index 4)
        assert_eq!(c.most_frequent(), 0b100);
    }

    #[test]
    fn dump_round_trip() {
        let inst = instance(5, 0.0, 1);
        let table = CostTable::new(&inst).unwrap();
        let s = run_circuit(&table, &AngleSchedule::new(vec![0.4], vec![0.3]).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 * 32);
        assert_eq!(Statevector::read_dump(&buf[..]).unwrap(), s);
        buf[0] = b'X';
        assert!(Statevector::read_dump(&buf[..]).is_err());
    }
}
