// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchor;
pub mod cli;
pub mod descriptors;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod pointcloud;
pub mod qap;

pub use error::{Error, Result};
