//! Command-line driver for `plaque-core`: scenario files, a thread-pool
//! executor for fine sweeps, and the report writers.

pub mod exec;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;
