//! File formats, a threaded executor, a monotonic clock, the benchmark
//! harness and the `dcd` command line built on [`dcd_core`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod exec;
pub mod io;

pub use error::CliError;
pub use exec::{MonotonicClock, Threads};
