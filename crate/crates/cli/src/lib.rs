//! Experiment runner: configuration, input formats, commands and artifacts.

pub mod commands;
pub mod config;
pub mod json;
pub mod output;
pub mod plots;
pub mod presets;

pub use commands::{run, Command, Outcome};
pub use config::ExperimentConfig;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
}
