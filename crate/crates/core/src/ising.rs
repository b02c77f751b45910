//! Ising cost function of the antenna problem and its exhaustive oracle.
//!
//! Spins use `z_i = 2 b_i - 1`: bit 1 is an active antenna (`z = +1`).
//! Bit `i` of a basis index is site `i`.
//!
//! The cost is evaluated term by term,
//!
//! ```text
//! H(z) = sum_{i != j} z_i J_ij z_j  -  xi sum_i A_i z_i
//!        + lambda (sum_{i != j} z_i z_j + dN sum_i z_i),     dN = n - 2 n_t
//! ```
//!
//! with ordered pairs, so every unordered pair contributes twice.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{circle_area, lens_area, SiteSet};
use crate::kernels;

/// Largest instance the exhaustive oracle accepts by default.
pub const BRUTE_FORCE_CAP: usize = 28;

/// Largest `n` a [`SpinString`] can hold.
pub const MAX_SPINS: usize = 63;

#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    /// Row-major `n x n` overlaps, symmetric with zero diagonal.
    overlaps: Vec<f64>,
    areas: Vec<f64>,
    xi: f64,
    lambda: f64,
    n_t: usize,
    delta_n_t: i64,
}

impl IsingInstance {
    /// Coefficients from geometry: `J_ij` lens areas, `A_i` disk areas.
    pub fn from_sites(sites: &SiteSet, xi: f64, lambda: f64, n_t: usize) -> Result<Self> {
        let n = sites.len();
        let mut overlaps = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = lens_area(&sites.sites[i], &sites.sites[j])?;
                overlaps[i * n + j] = v;
                overlaps[j * n + i] = v;
            }
        }
        let areas = sites.sites.iter().map(|s| circle_area(s.r)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(overlaps, areas, xi, lambda, n_t)
    }

    /// Precomputed coefficients. `overlaps` is row-major `n x n`.
    pub fn from_parts(overlaps: Vec<f64>, areas: Vec<f64>, xi: f64, lambda: f64, n_t: usize) -> Result<Self> {
        let n = areas.len();
        if n == 0 {
            return Err(invalid("instance needs at least one site"));
        }
        if overlaps.len() != n * n {
            return Err(invalid(format!("overlap matrix has {} entries, expected {}", overlaps.len(), n * n)));
        }
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(invalid(format!("xi must be finite and non-negative, got {xi}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid(format!("lambda must be finite and non-negative, got {lambda}")));
        }
        if n_t > n {
            return Err(invalid(format!("n_t = {n_t} exceeds site count {n}")));
        }
        for (i, &a) in areas.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(invalid(format!("area {i} must be finite and positive, got {a}")));
            }
        }
        for i in 0..n {
            if overlaps[i * n + i] != 0.0 {
                return Err(invalid(format!("overlap diagonal ({i},{i}) must be zero")));
            }
            for j in 0..n {
                let v = overlaps[i * n + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(format!("overlap ({i},{j}) must be finite and non-negative, got {v}")));
                }
                if v != overlaps[j * n + i] {
                    return Err(invalid(format!("overlap matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(IsingInstance { n, overlaps, areas, xi, lambda, n_t, delta_n_t: n as i64 - 2 * n_t as i64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.overlaps[i * self.n + j]
    }

    pub fn overlaps(&self) -> &[f64] {
        &self.overlaps
    }

    pub fn area(&self, i: usize) -> f64 {
        self.areas[i]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn delta_n_t(&self) -> i64 {
        self.delta_n_t
    }

    /// Same coefficients under different `(xi, lambda, n_t)`.
    pub fn with_parameters(&self, xi: f64, lambda: f64, n_t: usize) -> Result<Self> {
        Self::from_parts(self.overlaps.clone(), self.areas.clone(), xi, lambda, n_t)
    }

    /// Site relabelling: new site `k` is old site `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(invalid("not a permutation of the site indices"));
        }
        let mut overlaps = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                overlaps[a * n + b] = self.overlaps[perm[a] * n + perm[b]];
            }
        }
        let areas = perm.iter().map(|&p| self.areas[p]).collect();
        Self::from_parts(overlaps, areas, self.xi, self.lambda, self.n_t)
    }

    pub fn cost(&self, z: &SpinString) -> Result<f64> {
        if z.len() != self.n {
            return Err(invalid(format!("spin string of length {} for an instance of {} sites", z.len(), self.n)));
        }
        Ok(self.cost_index(z.index()))
    }

    /// Cost of the basis string `x` (bit `i` = site `i`).
    pub fn cost_index(&self, x: u64) -> f64 {
        let n = self.n;
        let spin = |i: usize| if (x >> i) & 1 == 1 { 1.0 } else { -1.0 };
        let mut overlap = 0.0;
        let mut coverage = 0.0;
        let mut magnetization: i64 = 0;
        for i in 0..n {
            let zi = spin(i);
            let row = &self.overlaps[i * n..(i + 1) * n];
            let mut field = 0.0;
            for (j, &jij) in row.iter().enumerate() {
                if j != i {
                    field += jij * spin(j);
                }
            }
            overlap += zi * field;
            coverage += self.areas[i] * zi;
            magnetization += if zi > 0.0 { 1 } else { -1 };
        }
        // sum_{i != j} z_i z_j = M^2 - n, exact in integers
        let pairs = magnetization * magnetization - n as i64;
        let penalty = self.lambda * ((pairs + self.delta_n_t * magnetization) as f64);
        overlap - self.xi * coverage + penalty
    }

    /// `Jt_ij = J_ij + lambda` off the diagonal and `At_i = lambda dN - xi A_i`.
    pub fn reduced_couplings(&self) -> ReducedCouplings {
        let n = self.n;
        let mut couplings = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    couplings[i * n + j] = self.overlaps[i * n + j] + self.lambda;
                }
            }
        }
        let fields = self
            .areas
            .iter()
            .map(|&a| self.lambda * self.delta_n_t as f64 - self.xi * a)
            .collect();
        ReducedCouplings { n, couplings, fields }
    }

    /// Exhaustive minimisation with the default cap.
    pub fn brute_force(&self) -> Result<Spectrum> {
        self.brute_force_capped(BRUTE_FORCE_CAP)
    }

    pub fn brute_force_capped(&self, cap: usize) -> Result<Spectrum> {
        if self.n > cap.min(MAX_SPINS) {
            return Err(Error::ResourceLimit(format!(
                "exhaustive search over {} sites exceeds the cap of {cap}",
                self.n
            )));
        }
        let scan = kernels::lowest_two(self.n, |x| self.cost_index(x));
        Ok(Spectrum { n: self.n, h_min: scan.min, ground_states: scan.argmin, gap: scan.second - scan.min })
    }

    /// Degree of each site counted over nonzero reduced couplings.
    pub fn degrees(&self) -> Vec<usize> {
        let red = self.reduced_couplings();
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| j != i && red.coupling(i, j) != 0.0).count())
            .collect()
    }

    /// Degree -> number of sites with that degree.
    pub fn connectivity_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for d in self.degrees() {
            *hist.entry(d).or_insert(0) += 1;
        }
        hist
    }

    pub fn mean_degree(&self) -> f64 {
        self.degrees().iter().sum::<usize>() as f64 / self.n as f64
    }

    /// Unordered pairs with a nonzero reduced coupling.
    pub fn interacting_pairs(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }
}

/// The cost in coupling form: `sum_{i != j} Jt_ij z_i z_j + sum_i At_i z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCouplings {
    pub n: usize,
    /// Row-major symmetric `n x n`, zero diagonal.
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
}

impl ReducedCouplings {
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn energy(&self, z: &SpinString) -> Result<f64> {
        if z.len() != self.n {
            return Err(invalid("spin string length does not match the couplings"));
        }
        Ok(self.energy_index(z.index()))
    }

    pub fn energy_index(&self, x: u64) -> f64 {
        let n = self.n;
        let spin = |i: usize| if (x >> i) & 1 == 1 { 1.0 } else { -1.0 };
        let mut h = 0.0;
        for i in 0..n {
            let zi = spin(i);
            let mut quad = 0.0;
            for j in 0..n {
                if j != i {
                    quad += self.couplings[i * n + j] * spin(j);
                }
            }
            h += zi * quad + self.fields[i] * zi;
        }
        h
    }
}

/// Exhaustive-search summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: usize,
    pub h_min: f64,
    /// Basis indices attaining `h_min`, ascending.
    pub ground_states: Vec<u64>,
    /// Second-lowest minus lowest entry of the sorted cost multiset; zero when
    /// the ground level is degenerate.
    pub gap: f64,
}

impl Spectrum {
    pub fn ground_strings(&self) -> Vec<SpinString> {
        self.ground_states.iter().map(|&x| SpinString::from_index(self.n, x).expect("n checked")).collect()
    }

    pub fn is_ground(&self, x: u64) -> bool {
        self.ground_states.binary_search(&x).is_ok()
    }
}

/// A spin configuration of length `n <= 63`, stored as its basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinString {
    n: usize,
    word: u64,
}

impl SpinString {
    pub fn from_index(n: usize, x: u64) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(invalid(format!("spin string length {n} outside 1..={MAX_SPINS}")));
        }
        if x >> n != 0 {
            return Err(invalid(format!("index {x} does not fit in {n} bits")));
        }
        Ok(SpinString { n, word: x })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut x = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 if i < MAX_SPINS => x |= 1 << i,
                1 => {}
                _ => return Err(invalid(format!("bit {i} is {b}, expected 0 or 1"))),
            }
        }
        Self::from_index(bits.len(), x)
    }

    pub fn from_spins(z: &[i8]) -> Result<Self> {
        let bits = z
            .iter()
            .map(|&s| match s {
                1 => Ok(1),
                -1 => Ok(0),
                other => Err(invalid(format!("spin value {other}, expected +1 or -1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self) -> u64 {
        self.word
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.word >> i) & 1) as u8
    }

    pub fn spin(&self, i: usize) -> i8 {
        2 * self.bit(i) as i8 - 1
    }

    pub fn active_count(&self) -> usize {
        self.word.count_ones() as usize
    }
}

/// Text form: character `i` is bit `i`, e.g. `"10"` has site 0 active.
impl fmt::Display for SpinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SpinString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bitstring {s:?} contains {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

/// Sort key matching the lexicographic order of the text form.
pub fn lexicographic_key(n: usize, x: u64) -> u64 {
    x.reverse_bits() >> (64 - n)
}

/// On-disk instance: either sites plus parameters, or precomputed coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub n_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<crate::geometry::Site>>,
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub areas: Option<Vec<f64>>,
}

/// Parameter overrides applied on top of an [`InstanceFile`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParamOverrides {
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub n_t: Option<usize>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn from_sites(sites: &SiteSet, xi: f64, lambda: f64, n_t: usize) -> Self {
        InstanceFile {
            label: Some(sites.label.clone()),
            xi: Some(xi),
            lambda: Some(lambda),
            n_t: Some(n_t),
            sites: Some(sites.sites.clone()),
            overlaps: None,
            areas: None,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Missing parameters default to `xi = 1/4`, `lambda = 0`, `n_t = floor(n/2)`.
    pub fn build(&self, overrides: ParamOverrides) -> Result<IsingInstance> {
        let xi = overrides.xi.or(self.xi).unwrap_or(crate::DEFAULT_XI);
        let lambda = overrides.lambda.or(self.lambda).unwrap_or(0.0);
        match (&self.sites, &self.overlaps, &self.areas) {
            (Some(sites), None, None) => {
                let set = SiteSet::new(self.label.clone().unwrap_or_default(), sites.clone())
                    .map_err(|e| Error::Parse(e.to_string()))?;
                let n_t = overrides.n_t.or(self.n_t).unwrap_or(crate::default_n_t(set.len()));
                IsingInstance::from_sites(&set, xi, lambda, n_t)
            }
            (None, Some(rows), Some(areas)) => {
                let n = areas.len();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse(format!("J must be {n} x {n} to match A")));
                }
                let n_t = overrides.n_t.or(self.n_t).unwrap_or(crate::default_n_t(n));
                IsingInstance::from_parts(rows.concat(), areas.clone(), xi, lambda, n_t)
            }
            _ => Err(Error::Parse("instance needs either \"sites\" or both \"J\" and \"A\"".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Site;
    use std::f64::consts::PI;

    fn pair(d: f64) -> SiteSet {
        SiteSet::new("pair", vec![Site::new(0.0, 0.0, 1.0).unwrap(), Site::new(d, 0.0, 1.0).unwrap()]).unwrap()
    }

    fn s(text: &str) -> SpinString {
        text.parse().unwrap()
    }

    #[test]
    fn build_disjoint_and_coincident() {
        let inst = IsingInstance::from_sites(&pair(5.0), 0.25, 0.0, 1).unwrap();
        assert_eq!(inst.overlaps(), &[0.0; 4]);
        assert_eq!(inst.areas(), &[PI, PI]);
        let inst = IsingInstance::from_sites(&pair(0.0), 0.25, 0.0, 1).unwrap();
        assert_eq!(inst.overlap(0, 1), PI);
        assert_eq!(inst.overlap(1, 0), PI);
        assert_eq!(inst.delta_n_t(), 0);
    }

    #[test]
    fn analytic_two_site_costs() {
        let disjoint = IsingInstance::from_sites(&pair(5.0), 0.25, 0.0, 1).unwrap();
        assert!((disjoint.cost(&s("11")).unwrap() - (-PI / 2.0)).abs() < 1e-15);
        let coincident = IsingInstance::from_sites(&pair(0.0), 0.25, 0.0, 1).unwrap();
        // site 0 active, site 1 inactive
        assert!((coincident.cost(&s("10")).unwrap() - (-2.0 * PI)).abs() < 1e-14);
        assert!(coincident.cost(&s("101")).is_err());
    }

    #[test]
    fn parameter_validation() {
        let p = pair(1.0);
        assert!(IsingInstance::from_sites(&p, -0.1, 0.0, 1).is_err());
        assert!(IsingInstance::from_sites(&p, 0.25, -1.0, 1).is_err());
        assert!(IsingInstance::from_sites(&p, 0.25, 0.0, 3).is_err());
        assert!(IsingInstance::from_sites(&p, f64::NAN, 0.0, 1).is_err());
        assert!(IsingInstance::from_parts(vec![0.0, 1.0, 2.0, 0.0], vec![1.0, 1.0], 0.25, 0.0, 1).is_err());
        assert!(IsingInstance::from_parts(vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 1.0], 0.25, 0.0, 1).is_err());
        assert!(IsingInstance::from_parts(vec![0.0; 4], vec![1.0, 0.0], 0.25, 0.0, 1).is_err());
    }

    #[test]
    fn reduced_form_small_cases() {
        let inst = IsingInstance::from_sites(&pair(1.0), 0.25, 0.0, 1).unwrap();
        let red = inst.reduced_couplings();
        assert_eq!(red.coupling(0, 1), inst.overlap(0, 1));
        assert_eq!(red.fields, vec![-0.25 * PI, -0.25 * PI]);

        let inst = IsingInstance::from_sites(&pair(1.0), 0.25, 1.0, 1).unwrap();
        let red = inst.reduced_couplings();
        assert_eq!(red.coupling(0, 1), inst.overlap(0, 1) + 1.0);
        assert_eq!(red.coupling(0, 0), 0.0);
        assert_eq!(red.fields, vec![-0.25 * PI, -0.25 * PI]);
    }

    #[test]
    fn single_site_brute_force() {
        let set = SiteSet::new("one", vec![Site::new(0.0, 0.0, 0.8).unwrap()]).unwrap();
        let inst = IsingInstance::from_sites(&set, 0.25, 0.0, 0).unwrap();
        let spec = inst.brute_force().unwrap();
        assert_eq!(spec.ground_states, vec![1]);
        assert!((spec.h_min + PI * 0.64 / 4.0).abs() < 1e-15);
        assert!(spec.gap > 0.0);
    }

    #[test]
    fn disjoint_pair_activates_both() {
        let inst = IsingInstance::from_sites(&pair(5.0), 0.25, 0.0, 1).unwrap();
        let spec = inst.brute_force().unwrap();
        assert_eq!(spec.ground_strings(), vec![s("11")]);
    }

    #[test]
    fn degenerate_ground_has_zero_gap() {
        // coincident circles with full coverage weight: "10" and "01" tie
        let inst = IsingInstance::from_sites(&pair(0.0), 1.0, 0.0, 1).unwrap();
        let spec = inst.brute_force().unwrap();
        assert_eq!(spec.ground_states.len(), 2);
        assert_eq!(spec.gap, 0.0);
    }

    #[test]
    fn brute_force_cap() {
        let inst = IsingInstance::from_sites(&pair(1.0), 0.25, 0.0, 1).unwrap();
        assert!(matches!(inst.brute_force_capped(1), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn connectivity() {
        let inst = IsingInstance::from_sites(&pair(5.0), 0.25, 0.0, 1).unwrap();
        assert_eq!(inst.connectivity_histogram(), BTreeMap::from([(0, 2)]));
        let inst = inst.with_parameters(0.25, 1.0, 1).unwrap();
        assert_eq!(inst.connectivity_histogram(), BTreeMap::from([(1, 2)]));
    }

    #[test]
    fn spin_string_text() {
        let z = s("1101");
        assert_eq!(z.index(), 0b1011);
        assert_eq!(z.to_string(), "1101");
        assert_eq!(z.spin(2), -1);
        assert_eq!(SpinString::from_spins(&[1, 1, -1, 1]).unwrap(), z);
        assert!("10a".parse::<SpinString>().is_err());
        assert!(SpinString::from_index(2, 4).is_err());
        assert!(lexicographic_key(4, s("0111").index()) < lexicographic_key(4, s("1000").index()));
    }

    #[test]
    fn instance_file_forms() {
        let text = r#"{"xi":0.25,"lambda":1,"n_t":1,"sites":[{"x":0,"y":0,"r":1},{"x":1,"y":0,"r":1}]}"#;
        let a = InstanceFile::parse(text).unwrap().build(ParamOverrides::default()).unwrap();
        let j = a.overlap(0, 1);
        let text = format!(r#"{{"xi":0.25,"lambda":1,"n_t":1,"J":[[0,{j}],[{j},0]],"A":[{PI},{PI}]}}"#);
        let b = InstanceFile::parse(&text).unwrap().build(ParamOverrides::default()).unwrap();
        assert_eq!(a, b);
        let c = InstanceFile::parse(&text)
            .unwrap()
            .build(ParamOverrides { lambda: Some(0.0), ..Default::default() })
            .unwrap();
        assert_eq!(c.lambda(), 0.0);
        assert!(InstanceFile::parse(r#"{"xi":0.25}"#).unwrap().build(ParamOverrides::default()).is_err());
    }
}
