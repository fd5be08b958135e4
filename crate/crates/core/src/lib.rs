#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![doc = include_str!("../README.md")]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod baseline;
pub mod elliptic;
pub mod error;
pub mod linalg;
mod math;
pub mod model;
pub mod newton;
pub mod simpson;
pub mod systems;

pub use error::{Error, Result};
pub use math::norm_inf;
