//! Candidate antenna sites and the areas that define the Ising coefficients.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// A candidate site: disk centre and coverage radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Site {
    pub fn new(x: f64, y: f64, r: f64) -> Result<Self> {
        let site = Site { x, y, r };
        site.validate()?;
        Ok(site)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(invalid(format!("non-finite centre ({}, {})", self.x, self.y)));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(invalid(format!("radius must be finite and positive, got {}", self.r)));
        }
        Ok(())
    }

    pub fn distance(&self, other: &Site) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Ordered candidate sites. Site `i` is qubit `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteSet {
    pub label: String,
    pub sites: Vec<Site>,
}

impl SiteSet {
    pub fn new(label: impl Into<String>, sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("a site set needs at least one site"));
        }
        for (i, s) in sites.iter().enumerate() {
            s.validate().map_err(|e| invalid(format!("site {i}: {e}")))?;
        }
        Ok(SiteSet { label: label.into(), sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Sites `0..n`, keeping the ordering.
    pub fn prefix(&self, n: usize) -> Result<SiteSet> {
        if n == 0 || n > self.len() {
            return Err(invalid(format!("prefix of {n} sites from a set of {}", self.len())));
        }
        SiteSet::new(format!("{}[..{n}]", self.label), self.sites[..n].to_vec())
    }
}

#[derive(Deserialize)]
struct RawSiteSet {
    #[serde(default)]
    label: String,
    sites: Vec<Site>,
}

impl<'de> Deserialize<'de> for SiteSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSiteSet::deserialize(d)?;
        SiteSet::new(raw.label, raw.sites).map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let b = BBox { x0, y0, x1, y1 };
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || x1 <= x0 || y1 <= y0 {
            return Err(invalid(format!("degenerate bounding box {b}")));
        }
        Ok(b)
    }

    /// Square `[0, side]^2`.
    pub fn square(side: f64) -> Result<Self> {
        BBox::new(0.0, 0.0, side, side)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.y0, self.x1, self.y1)
    }
}

impl FromStr for BBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bounding box {s:?}: {e}")))?;
        match v[..] {
            [x0, y0, x1, y1] => BBox::new(x0, y0, x1, y1),
            _ => Err(Error::Parse(format!("bounding box {s:?}: expected x0,y0,x1,y1"))),
        }
    }
}

/// `pi r^2`.
pub fn circle_area(r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("radius must be finite and positive, got {r}")));
    }
    Ok(PI * r * r)
}

/// Area of the intersection of the two disks.
///
/// Exactly symmetric: the arguments are put in canonical order (larger radius
/// first) before the circular-segment sum is evaluated.
pub fn lens_area(a: &Site, b: &Site) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let (big, small) = if (a.r, a.x, a.y) >= (b.r, b.x, b.y) { (a, b) } else { (b, a) };
    let d = big.distance(small);
    Ok(lens_area_at(big.r, small.r, d))
}

/// Lens area for radii `r1 >= r2` at centre distance `d`.
pub(crate) fn lens_area_at(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= r1 - r2 {
        return PI * r2 * r2;
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let kite = (r1 + r2 - d) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    let area = r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * kite.max(0.0).sqrt();
    area.clamp(0.0, PI * r2 * r2)
}

/// `n` sites with centres uniform in `bbox` and radii uniform in `(0, r_max]`.
///
/// Draws come from the [`rng::GENERATE`] stream of `seed`, in site order,
/// three per site: `x`, `y`, then `r = r_max * (1 - u)`.
pub fn generate_instance(n: usize, bbox: BBox, r_max: f64, seed: u64) -> Result<SiteSet> {
    if n == 0 {
        return Err(invalid("site count must be at least 1"));
    }
    let bbox = BBox::new(bbox.x0, bbox.y0, bbox.x1, bbox.y1)?;
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(invalid(format!("r_max must be finite and positive, got {r_max}")));
    }
    let mut rng = rng::stream(seed, &[rng::GENERATE]);
    let sites = (0..n)
        .map(|_| {
            let x = bbox.x0 + (bbox.x1 - bbox.x0) * rng.random::<f64>();
            let y = bbox.y0 + (bbox.y1 - bbox.y0) * rng.random::<f64>();
            let r = r_max * (1.0 - rng.random::<f64>());
            Site { x, y, r }
        })
        .collect();
    SiteSet::new(format!("uniform n={n} bbox={bbox} rmax={r_max} seed={seed}"), sites)
}

pub fn load_sites(path: impl AsRef<Path>) -> Result<SiteSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_sites(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_sites(text: &str) -> Result<SiteSet> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_sites(sites: &SiteSet, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(sites).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
