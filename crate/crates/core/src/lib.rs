//! Convex state spaces of general probabilistic models.
//!
//! A model is a polytope of states given by its vertices. From it this crate
//! computes the Minkowski measure of point-asymmetry, the storable
//! information `n` (as a primal/dual pair of linear programs), max-relative
//! entropies, distinguishable numbers, capacity lower bounds and Helstrom
//! families, together with the identities and inequality chains that tie
//! them together.

pub mod error;
pub mod geometry;
pub mod helstrom;
pub mod info;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod sample;
pub mod zoo;

pub use error::{Error, Result};
