//! Numerical laboratory for fine analytic continuation.
//!
//! The crate builds thin-set certificates from logarithmic potentials,
//! estimates harmonic measure in slit disks by walk-on-spheres, evaluates
//! the standard families of finely analytic functions (Borel series, Cauchy
//! transforms, square-root branch sums, saw-domain Cauchy integrals), and
//! assembles the quantitative hypothesis chain that places the graph of a
//! fine continuation inside the pluripolar hull of the graph over the disk.
//!
//! Modules:
//! - [`geometry`]: plane primitives, rhombs over arcs, contour quadrature.
//! - [`potential`]: logarithmic-potential certificates and thinness checks.
//! - [`harmonic`]: exact and Monte Carlo harmonic measure and the estimate chain.
//! - [`finefun`]: function families with approximant sequences.
//! - [`scenario`]: certification pipelines, scenario files, reports.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finefun;
pub mod geometry;
pub mod harmonic;
pub mod potential;
pub mod sampling;
pub mod scenario;

pub(crate) mod par;
pub(crate) mod serde_float;

pub use error::{Error, Result};
pub use geometry::CPoint;
