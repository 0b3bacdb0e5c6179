//! Library for building, solving, and certifying convex relaxations of
//! rank-constrained matrix optimization problems.
//!
//! A problem minimizes a linear matrix objective over a rank-constrained
//! domain set intersected with two-sided linear matrix inequalities. The
//! relaxation replaces the domain set by its closed convex hull. This crate
//! provides:
//!
//! - the data model and file format ([`model`]),
//! - the hulls of the supported domain kinds ([`hull`]),
//! - a first-order splitting solver with dual certificates ([`solver`]),
//! - constructive rank reduction to extreme points ([`facial`]),
//! - exactness prediction and numerical verification ([`certify`]),
//! - rank-one and rank-k solution extraction ([`rounding`]),
//! - the bundled demonstration fixtures ([`demos`]).
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod certify;
pub mod demos;
pub mod facial;
pub(crate) mod kkt;
pub mod hull;
pub mod matrixcore;
pub mod model;
pub mod rounding;
pub mod signs;
pub mod solver;
