//! File formats, batch runner and command line for the safin lane-change planner.
//!
//! The planning, safety and simulation logic lives in `safin-core`; this crate
//! adds what needs `std`: model and dataset files, replay traces, metric
//! tables, a worker pool and the `safin` binary.

pub mod cli;
pub mod config;
pub mod dataset_file;
pub mod format;
pub mod model_file;
pub mod replay;
pub mod report;
pub mod runner;
pub mod trajectory;

pub use format::FormatError;
