//! Density constants, frame bounds and empirical frame verification for
//! nonuniform derivative sampling and bunched sampling of bandlimited
//! functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bunched;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod multi_index;
pub mod quadrature;
pub mod tables;
pub mod wirtinger;

pub use error::{Error, Result};
