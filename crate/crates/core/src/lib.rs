//! Standing internal waves in a uniformly stratified fluid over a bottom of
//! variable depth, constructed from solutions of the functional equation
//! `f(x + d(x)/nu) - f(x - d(x)/nu) = Q`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod charmap;
pub mod cli;
pub mod construct;
pub mod error;
pub mod geometry;
mod interp;
pub mod schroder;
pub mod verify;
pub mod wavefield;

pub use error::{Error, Result};
