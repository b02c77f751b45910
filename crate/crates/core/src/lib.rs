//! Antenna-placement Ising instances and their exact-emulation solvers.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: candidate sites, circle and lens areas, random instances.
//! - [`ising`]: cost function, reduced couplings, exhaustive oracle.
//! - [`statevector`]: diagonal-cost circuit emulation (phase and mixer layers).
//! - [`schedules`]: linear adiabatic ramps, INTERP extension, walker clouds.
//! - [`optimizer`]: COBYLA local search, depth ladder, delta sweeps, `p_min`.
//! - [`metrics`]: approximation ratios, cumulative probability, fits, gate budgets.
//!
//! Hot loops live in [`kernels`]. With the default `parallel` feature they run
//! on rayon; without it the sequential kernels are used. Both produce
//! bit-identical results.

pub mod error;
pub mod geometry;
pub mod ising;
pub mod kernels;
pub mod metrics;
pub mod optimizer;
pub mod rng;
pub mod schedules;
pub mod statevector;

pub use error::{Error, Result};
pub use geometry::{BBox, Site, SiteSet};
pub use ising::{IsingInstance, ReducedCouplings, SpinString, Spectrum};
pub use schedules::{AngleSchedule, QaaConfig};
pub use statevector::{CostTable, ShotCounts, Statevector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default coverage weight.
pub const DEFAULT_XI: f64 = 0.25;

/// Default target count of active sites, `floor(n / 2)`.
pub fn default_n_t(n: usize) -> usize {
    n / 2
}
