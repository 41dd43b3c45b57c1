//! Command-line front end for `fieldctl-core`: TOML run configurations,
//! parameter sweeps on a rayon pool, and deterministic CSV/JSON artifacts.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, to_toml, ConfigError, RunConfig, Task};
pub use run::{execute, load_config, CliError, Outcome, RunOptions};
