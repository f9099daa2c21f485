//! Simulator of coincidence imaging with entangled photon pairs.
//!
//! A two-photon source feeds a two-arm optical system: the probe arm carries
//! a reflective pure phase object and ends on a fixed slit detector, the
//! reference arm is free space ending on a scanned slit detector. The crate
//! computes the fourth-order coherence surface of the pair, the resulting
//! coincidence scans, singles rates, and the advanced-wave (point-source)
//! equivalent image, with a direct-quadrature kernel route serving as the
//! oracle for the chirp-z fast route.

pub mod coincidence;
mod czt;
pub mod elements;
pub mod error;
pub mod grid;
pub mod propagation;
pub mod report;
pub mod scenario;
pub mod source;

pub use error::{Result, SimError};
pub use grid::{ComplexField, Grid1D, Wavelength};
