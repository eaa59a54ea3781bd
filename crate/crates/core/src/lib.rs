//! Matching engine and day simulator for ridesharing integrated with public
//! transit.
//!
//! Drivers announce trips with seats to spare; riders announce trips they
//! would otherwise make by transit. The engine enumerates every feasible
//! driver–rider group ([`feasibility`]), then picks a trip-disjoint set of
//! groups that serves as many riders as possible ([`packing`]). The
//! [`generator`] and [`harness`] modules drive the whole pipeline over a
//! synthetic day of 15-minute intervals.

pub mod error;
pub mod feasibility;
pub mod generator;
pub mod harness;
pub mod network;
pub mod packing;
pub mod trip;

pub use error::{Error, Result};

/// Timestamps (seconds since midnight) and durations (seconds).
pub type Seconds = i64;
