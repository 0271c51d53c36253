//! Monte Carlo laboratory for bond percolation on a column-diluted cubic
//! lattice.
//!
//! The model removes whole vertical columns of the cubic lattice
//! independently (a column survives with probability rho) and then performs
//! Bernoulli bond percolation with parameter p on what remains. This crate
//! implements the constructive machinery used to compare that process with
//! an inhomogeneous strip percolation:
//!
//! * [`site2d`] — the planar column environment, rectangle crossings and the
//!   calibration of the spiral base scale;
//! * [`spiral`] — overlapping spiral rectangles, lowest crossings inside
//!   them, their concatenation into one minimal occupied path, and the
//!   decoration of that path with fresh unit threads;
//! * [`brochette`] — strip percolation with randomly strengthened columns;
//! * [`coupling`] — the joint construction that maps the decorated path onto
//!   a strengthened strip, with exact single-edge oracles and pathwise
//!   domination checks;
//! * [`perc3d`] — direct simulation of the diluted cubic lattice and the
//!   critical-curve estimator.

pub mod brochette;
pub mod coupling;
pub mod dsu;
pub mod geom;
pub mod perc3d;
pub mod report;
pub mod rng;
pub mod site2d;
pub mod spiral;
pub mod stats;
pub mod svg;
pub mod sweep;
