//! Elastic energies, admissibility and minimisation for planar curve networks
//! built on angled graphs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classify;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod optimize;
