//! File formats, fixture sources and command implementations for the
//! `electorate` command-line tool.
//!
//! The pure analytics live in [`electorate_core`]; this crate adds
//! everything that touches the file system.

pub mod commands;
pub mod error;
pub mod fixture;
pub mod formats;
pub mod report;

pub use error::{BadInput, InputContext};
