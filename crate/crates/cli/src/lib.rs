//! Library side of the `delaylab` binary: config ingestion and report
//! serialization, exposed so integration tests can drive the same paths the
//! executable uses.

pub mod config;
pub mod output;
