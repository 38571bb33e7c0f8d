//! Command-line driver: file loading, the check/graph/verify/sat/refine/trace
//! commands, and their text and JSON renderings.
//!
//! Every command assembles its whole output as a string and returns it with
//! an exit code, so runs are byte-reproducible and directly testable.
//!
//! Exit codes: 0 success (holds / model found / simulated), 1 a definite
//! negative verdict (violated / unsat / not simulated), 2 diagnostics or
//! elaboration faults, 3 IO errors, 4 inconclusive results under a
//! state-count bound.

pub mod commands;
pub mod config;
pub mod loader;
pub mod pipeline;
pub mod render;

pub use commands::{run, CommandOutput};
pub use config::{Command, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_DIAGNOSTICS: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
