//! Allocation mechanisms with frictional costs.
//!
//! The crate evaluates risk-sharing / allocation rules exactly on finite
//! probability spaces, verifies their axioms with seeded randomized checks,
//! and provides closed-form analytics for the left expected-shortfall
//! mechanism under multivariate normal endowments.
//!
//! Everything here is `no_std` + `alloc`; file formats, CSV ingestion and
//! the command-line front end live in the `fricshare` crate.
//!
//! Module map:
//!
//! - [`prob`]: finite spaces, random variables, information partitions,
//!   conditional expectation and measure restriction checks.
//! - [`mechanisms`]: CMRS and its subjective/robust variants, left expected
//!   shortfall, mean-deviation, QBRS, proportional rule, frictional costs.
//! - [`axioms`]: randomized axiom harness and the rule comparison matrix.
//! - [`gaussian`]: normal special functions, closed-form ES allocations,
//!   participation trade-offs, thresholds, sweeps and the CRRA fee example.
//! - [`empirical`]: loss tables, summary statistics and Gaussian reports.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod axioms;
pub mod empirical;
mod error;
pub mod gaussian;
pub mod mechanisms;
pub mod prob;

pub use error::{Error, Result};
