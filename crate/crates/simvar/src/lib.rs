//! Experiments, file formats and command-line plumbing around
//! [`simvar_core`]: configuration, CSV/JSON output, convergence sweeps, the
//! reduced-top comparison and model validation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiments;
pub mod report;

pub use error::{AppError, Result};
