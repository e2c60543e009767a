//! Topological invariants of Euclidean vector fields at isolated critical points.
//!
//! The crate computes angle lifts and winding numbers of planar loops, local indices
//! of planar maps, Brouwer-degree certificates for zero existence, sublevel-set
//! component counts, and implicit-equation solutions at points where the Jacobian
//! with respect to the unknowns is singular.
//!
//! Fields come from a small expression language ([`field_expr`]) or from the named
//! constructions in [`gallery`].

// `!(a > b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod components;
pub mod degree;
mod error;
pub mod field_expr;
pub mod gallery;
pub mod geometry;
pub mod hadamard;
pub mod implicit;
pub mod newton;
pub mod winding;

pub use error::{Error, Result};
pub use field_expr::{parse_field, FieldAst, VectorField};
pub use geometry::{AxisBox, Region};
