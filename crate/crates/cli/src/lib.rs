//! Library surface of the experiment harness; the binary in `main.rs` is a
//! thin clap wrapper over these modules, and the integration tests drive
//! them directly.

pub mod charts;
pub mod config;
pub mod experiments;
pub mod output;
