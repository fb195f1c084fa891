//! Explicit ReQU networks for Hölder-smooth functions.
//!
//! A ReQU network applies `requ(x) = max(0, x)^2` after every affine layer but
//! the last. This crate builds such networks from closed-form weights: exact
//! products and monomials, box indicators, a localized Taylor approximator
//! with a partition of unity, and a square root iteration.

pub mod approximator;
pub mod calculus;
pub mod error;
pub mod gadgets;
pub mod multi_index;
pub mod network;
pub mod partition;
pub mod registry;
pub mod sampling;
pub mod sparse;
pub mod taylor;
pub mod verify;

pub use error::{Error, Result};
pub use network::{requ, Complexity, Layer, Network, WeightFormat};
pub use sparse::SparseMatrix;
