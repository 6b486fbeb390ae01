//! Exact moments of noncommutative random variables and their central limits.
//!
//! The crate evaluates joint moments under tensor, free, boolean and monotone
//! independence, expands finite-`N` moments of normalized sums, computes the
//! pair-partition limits, and cross-checks every limit against Fock-space
//! ladder operators (including a B-valued boolean Fock module).

pub mod cli;
pub mod clt;
pub mod error;
pub mod fock;
pub mod moments;
pub mod opvalued;
pub mod partitions;
pub mod poly;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use moments::{IndependenceKind, Label, SiteDistribution, Word};
pub use poly::QPoly;
pub use scalar::{Rational, Scalar};
