//! Loewner chains, SLE driving processes, conformal slit-map arithmetic and
//! Monte Carlo machinery for radial conformal restriction measures.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and multi-threaded fan-out live in the `radres` crate.
//! Modules import `num_traits::Float` for the float methods; whenever std is
//! present in the build its inherent methods take over and the import idles.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod conformal;
pub mod geometry;
pub mod loewner;
pub mod loopsoup;
pub mod restriction;
pub mod sampler;
pub mod sle;
pub mod stats;
pub mod zipper;

mod error;

pub use error::Error;

/// Complex numbers in double precision.
pub type C = num_complex::Complex64;

/// Which canonical domain a map or curve lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// The upper half-plane H, curves grow from the real line toward infinity.
    HalfPlane,
    /// The unit disc U, curves grow from the unit circle toward 0.
    Disc,
}

pub type Result<T> = core::result::Result<T, Error>;
