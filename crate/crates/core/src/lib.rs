#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod acov;
pub mod baselines;
pub mod bootstrap;
pub mod dgp;
pub mod error;
pub mod lpb;
pub mod mc;
pub mod result;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
