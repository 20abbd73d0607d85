//! File formats, parallel runs and the `radres` command line for the
//! `radres-core` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod formats;
pub mod hulls;
pub mod parallel;

pub use error::{CliError, Result};
