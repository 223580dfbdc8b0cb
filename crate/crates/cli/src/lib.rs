//! Configuration parsing and run orchestration for the `gbec` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_list, ConfigError, Format, Mode, RunConfig};
pub use run::{run, GroundRow, RunError, RunSummary};

/// Exit status for a configuration error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for an I/O failure.
pub const EXIT_IO: i32 = 3;
