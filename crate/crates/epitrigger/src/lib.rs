//! File formats, parallel sweeps and the `epitrigger` command line on top
//! of [`epitrigger_core`].

pub mod cli;
pub mod config;
pub mod output;
pub mod parallel;

pub use cli::{cli_main, run_cli};
pub use config::{parse_config, ConfigDocument, ConfigError};
pub use output::{read_sweep, read_trajectory, sweep_document, trajectory_document};
pub use parallel::run_sweep_parallel;
