//! Data-parallel inner loops.
//!
//! [`seq`] is always compiled; [`par`] exists with the `parallel` feature. The
//! free functions at this level dispatch to `par` when it is available. Both
//! variants visit the same index ranges and reduce with the same pairwise tree,
//! so their results are bit-identical.

use num_complex::Complex64;

/// Leaf size of the pairwise summation tree.
const SUM_BLOCK: usize = 1024;

/// Below this many amplitudes the parallel kernels fall back to [`seq`].
pub const PAR_THRESHOLD: usize = 1 << 13;

/// Lowest two entries of a cost multiset, with every index attaining the lowest.
#[derive(Debug, Clone, PartialEq)]
pub struct LowScan {
    pub min: f64,
    /// Ascending.
    pub argmin: Vec<u64>,
    pub second: f64,
}

impl LowScan {
    fn empty() -> Self {
        LowScan { min: f64::INFINITY, argmin: Vec::new(), second: f64::INFINITY }
    }

    fn push(&mut self, x: u64, v: f64) {
        if v < self.min {
            self.second = if self.argmin.is_empty() { self.second } else { self.min };
            self.min = v;
            self.argmin.clear();
            self.argmin.push(x);
        } else if v == self.min {
            self.argmin.push(x);
            self.second = v;
        } else if v < self.second {
            self.second = v;
        }
    }

    /// `self` covers lower indices than `other`.
    fn merge(mut self, other: LowScan) -> LowScan {
        if other.argmin.is_empty() {
            return self;
        }
        if self.argmin.is_empty() {
            return other;
        }
        if self.min < other.min {
            self.second = self.second.min(other.min);
            self
        } else if other.min < self.min {
            LowScan { second: other.second.min(self.min), ..other }
        } else {
            self.argmin.extend(other.argmin);
            self.second = self.min;
            self
        }
    }
}

fn mix_pair(a: &mut Complex64, b: &mut Complex64, c: f64, s: f64) {
    let (ar, ai, br, bi) = (a.re, a.im, b.re, b.im);
    // (a, b) -> (c a - i s b, c b - i s a)
    *a = Complex64::new(c * ar + s * bi, c * ai - s * br);
    *b = Complex64::new(c * br + s * ai, c * bi - s * ar);
}

pub mod seq {
    use super::*;

    pub fn fill(n: usize, f: impl Fn(u64) -> f64) -> Vec<f64> {
        (0..1u64 << n).map(f).collect()
    }

    pub fn lowest_two(n: usize, f: impl Fn(u64) -> f64) -> LowScan {
        scan_range(0, 1u64 << n, &f)
    }

    pub(super) fn scan_range(lo: u64, hi: u64, f: &impl Fn(u64) -> f64) -> LowScan {
        let mut acc = LowScan::empty();
        for x in lo..hi {
            acc.push(x, f(x));
        }
        acc
    }

    /// `amp[x] *= exp(-i gamma values[x])`.
    pub fn phase(amp: &mut [Complex64], values: &[f64], gamma: f64) {
        for (a, &v) in amp.iter_mut().zip(values) {
            *a *= Complex64::cis(-gamma * v);
        }
    }

    pub fn phase_with(amp: &mut [Complex64], f: impl Fn(u64) -> f64, gamma: f64) {
        for (x, a) in amp.iter_mut().enumerate() {
            *a *= Complex64::cis(-gamma * f(x as u64));
        }
    }

    /// `exp(-i beta X_q)` on every qubit `q`.
    pub fn mixer(amp: &mut [Complex64], beta: f64) {
        let (s, c) = beta.sin_cos();
        let mut stride = 1;
        while stride < amp.len() {
            for block in amp.chunks_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    mix_pair(a, b, c, s);
                }
            }
            stride *= 2;
        }
    }

    /// Pairwise sum of `term(x)` over `0..len`.
    pub fn pairwise_sum(len: usize, term: &impl Fn(usize) -> f64) -> f64 {
        sum_range(0, len, term)
    }

    pub(super) fn sum_range(lo: usize, hi: usize, term: &impl Fn(usize) -> f64) -> f64 {
        if hi - lo <= SUM_BLOCK {
            let mut s = 0.0;
            for x in lo..hi {
                s += term(x);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

#[cfg(feature = "parallel")]
pub mod par {
    use super::*;
    use rayon::prelude::*;

    const SCAN_CHUNK: u64 = 1 << 12;

    // `f` is Sync but not Send, so the closure borrows it
    #[allow(clippy::redundant_closure)]
    pub fn fill(n: usize, f: impl Fn(u64) -> f64 + Sync) -> Vec<f64> {
        if (1usize << n) < PAR_THRESHOLD {
            return seq::fill(n, f);
        }
        (0..1u64 << n).into_par_iter().map(|x| f(x)).collect()
    }

    pub fn lowest_two(n: usize, f: impl Fn(u64) -> f64 + Sync) -> LowScan {
        let total = 1u64 << n;
        if total <= SCAN_CHUNK {
            return seq::lowest_two(n, f);
        }
        (0..total / SCAN_CHUNK)
            .into_par_iter()
            .map(|c| seq::scan_range(c * SCAN_CHUNK, (c + 1) * SCAN_CHUNK, &f))
            .reduce(LowScan::empty, LowScan::merge)
    }

    pub fn phase(amp: &mut [Complex64], values: &[f64], gamma: f64) {
        if amp.len() < PAR_THRESHOLD {
            return seq::phase(amp, values, gamma);
        }
        amp.par_iter_mut().zip(values.par_iter()).for_each(|(a, &v)| *a *= Complex64::cis(-gamma * v));
    }

    pub fn phase_with(amp: &mut [Complex64], f: impl Fn(u64) -> f64 + Sync, gamma: f64) {
        if amp.len() < PAR_THRESHOLD {
            return seq::phase_with(amp, f, gamma);
        }
        amp.par_iter_mut().enumerate().for_each(|(x, a)| *a *= Complex64::cis(-gamma * f(x as u64)));
    }

    pub fn mixer(amp: &mut [Complex64], beta: f64) {
        if amp.len() < PAR_THRESHOLD {
            return seq::mixer(amp, beta);
        }
        let (s, c) = beta.sin_cos();
        let mut stride = 1;
        while stride < amp.len() {
            // Each block holds both members of every pair for this qubit.
            if amp.len() / (2 * stride) >= 64 {
                amp.par_chunks_mut(2 * stride).for_each(|block| {
                    let (lo, hi) = block.split_at_mut(stride);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        mix_pair(a, b, c, s);
                    }
                });
            } else {
                for block in amp.chunks_mut(2 * stride) {
                    let (lo, hi) = block.split_at_mut(stride);
                    lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| mix_pair(a, b, c, s));
                }
            }
            stride *= 2;
        }
    }

    pub fn pairwise_sum(len: usize, term: &(impl Fn(usize) -> f64 + Sync)) -> f64 {
        sum_range(0, len, term)
    }

    fn sum_range(lo: usize, hi: usize, term: &(impl Fn(usize) -> f64 + Sync)) -> f64 {
        if hi - lo <= PAR_THRESHOLD {
            return seq::sum_range(lo, hi, term);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, b) = rayon::join(|| sum_range(lo, mid, term), || sum_range(mid, hi, term));
        a + b
    }
}

#[cfg(feature = "parallel")]
use par as active;
#[cfg(not(feature = "parallel"))]
use seq as active;

pub fn fill(n: usize, f: impl Fn(u64) -> f64 + Sync) -> Vec<f64> {
    active::fill(n, f)
}

pub fn lowest_two(n: usize, f: impl Fn(u64) -> f64 + Sync) -> LowScan {
    active::lowest_two(n, f)
}

pub fn phase(amp: &mut [Complex64], values: &[f64], gamma: f64) {
    active::phase(amp, values, gamma)
}

pub fn phase_with(amp: &mut [Complex64], f: impl Fn(u64) -> f64 + Sync, gamma: f64) {
    active::phase_with(amp, f, gamma)
}

pub fn mixer(amp: &mut [Complex64], beta: f64) {
    active::mixer(amp, beta)
}

pub fn pairwise_sum(len: usize, term: &(impl Fn(usize) -> f64 + Sync)) -> f64 {
    active::pairwise_sum(len, term)
}

/// Size the global worker pool. Without the `parallel` feature this only
/// checks the argument.
pub fn configure_threads(n: usize) -> crate::Result<()> {
    if n == 0 {
        return Err(crate::error::invalid("thread count must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| crate::error::invalid(format!("thread pool: {e}")))?;
    Ok(())
}

/// Map over independent tasks, keeping input order.
pub fn map_tasks<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
