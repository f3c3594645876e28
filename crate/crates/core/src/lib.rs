#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dgeom;
pub mod harness;
pub mod modelspace;
pub mod surfaces;
mod vec3;
pub mod wexpr;
