#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod config;
pub mod error;
pub mod fieldio;
pub mod fraccalc;
pub mod kernels;
pub mod levy;
pub mod lpnorms;
pub mod params;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
