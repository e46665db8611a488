//! Coarse geometry of finite truncations: nets, Rips graphs, partitions of
//! unity, controlled coarse homology and weighted isoperimetric and Sobolev
//! constants, all computed on explicit finite metric spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod error;
pub mod flow;
pub mod homology;
pub mod inequalities;
pub mod io;
pub mod metric;
pub mod net;
pub mod partition;
pub mod pipeline;
pub mod report;
pub mod rips;
pub mod rng;

pub use error::{Error, Result};

/// Absolute tolerance for comparisons of distances and radii.
pub const TOL: f64 = 1e-9;
