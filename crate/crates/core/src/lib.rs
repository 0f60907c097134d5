//! Core analytics for measuring gender effects in candidate-follower dynamics.
//!
//! Everything in this crate is pure computation over in-memory data and
//! builds without `std` (only `alloc` is required):
//!
//! - [`snapshot`]: immutable follower-ID snapshots and their diffs.
//! - [`ingest`]: paged follower-ID fetching with retries and rate limiting
//!   against an abstract [`ingest::PageSource`] and [`ingest::Clock`].
//! - [`audience`]: membership, four-group partitions and destination rates.
//! - [`image`]: face-crop selection, bilinear resize and normalization.
//! - [`labeler`]: weak gender labels from display names and class balancing.
//! - [`cnn`]: a small two-convolution network trained with plain SGD.
//! - [`normal`]: the standard normal CDF and its inverse.
//! - [`affinity`]: the probit follow model and its population simulator.
//! - [`ztest`]: the pooled two-sample proportion z-test.
//!
//! File formats, the command line and OS integration live in the companion
//! `electorate` crate.

#![no_std]

extern crate alloc;

pub mod affinity;
pub mod audience;
pub mod cnn;
pub mod gender;
pub mod image;
pub mod ingest;
pub mod labeler;
pub mod normal;
pub mod rng;
pub mod snapshot;
pub mod synthetic;
pub mod ztest;

pub use gender::Gender;
pub use snapshot::{Candidate, DiffResult, Snapshot, SnapshotError, Timestamp};
