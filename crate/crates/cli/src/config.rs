//! Run configuration shared by all commands.

use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Check,
    Graph,
    Verify,
    Sat { formula: String },
    Refine { abstract_name: String, refined_name: String },
    Trace { steps: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub entry_file: PathBuf,
    /// Entry system; defaults to the sole system with a `Main` spec in the
    /// entry file.
    pub system: Option<String>,
    /// Arguments passed to the entry system's `init`.
    pub args: Vec<String>,
    pub max_states: usize,
    pub format: Format,
    /// Module search paths; the entry file's directory is always appended.
    pub search_paths: Vec<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, entry_file: PathBuf) -> Self {
        RunConfig {
            command,
            entry_file,
            system: None,
            args: Vec::new(),
            max_states: 1_000_000,
            format: Format::Text,
            search_paths: Vec::new(),
        }
    }
}
