//! Reconstruction of camera networks whose only observations are sightings of
//! one another, and analysis of when such networks are solvable.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod optim;
pub mod quad;
pub mod recon2d;
pub mod recon3d;
pub mod region;
pub mod stochastic;
pub mod visibility;

pub use error::{Error, Result};
