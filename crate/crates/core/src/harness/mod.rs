//! Experiment harness: configuration, phantom generation, deterministic
//! randomness, file I/O, and the mode dispatcher behind the CLI.

mod config;
mod io;
mod phantom;
mod rng;
mod run;

pub use config::{ExperimentConfig, Mode};
pub use io::{
    read_field_raw, read_trace_raw, write_field_raw, write_matrix_raw, write_pgm, write_trace_csv,
    write_trace_raw,
};
pub use phantom::{generate_phantom, Bump, PhantomSpec};
pub use rng::SplitMix64;
pub use run::{format_selftest, run, selftest, RunSummary, SelfTestOutcome};
