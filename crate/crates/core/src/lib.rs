//! Root systems of Coxeter groups acting on Lorentzian spaces.
//!
//! The crate builds Gram matrices from Coxeter diagrams, enumerates positive
//! roots and group orbits, normalizes them into the projective ball model, and
//! compares the accumulation set of normalized roots with the limit set of
//! the group acting on hyperbolic space. The [`gasket`] module constructs the
//! Apollonian gasket that arises for the rank-4 universal Coxeter group.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classify;
pub mod coxeter;
pub mod error;
pub mod form;
pub mod gasket;
pub mod limits;
pub mod models;
pub mod projective;
pub mod render;

pub use error::{Error, ErrorClass, Result};
pub use form::{CoxeterDiagram, EdgeLabel, GramMatrix, Signature, Vector, VectorType};
