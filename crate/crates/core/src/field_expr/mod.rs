//! Vector fields from a small expression language, with forward-mode Jacobians.

mod ast;
mod field;
mod parse;
mod scalar;

pub use ast::{Expr, FieldAst, Func};
pub use field::{CustomField, JacobianMode, VectorField};
pub use parse::{parse_expr, parse_field};
pub use scalar::{Dual, Scalar};
