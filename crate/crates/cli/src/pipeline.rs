//! Load, link, check, and elaborate — shared by every command.

use std::collections::BTreeMap;
use std::path::PathBuf;

use seni_core::diag::{render_all, Diagnostics};
use seni_core::elab::{elaborate, SystemInstance};
use seni_core::lexer::tokenize;
use seni_core::parser::parse;
use seni_core::sema::{check_program, resolve_imports, CheckedProgram, SystemDef};

use crate::config::RunConfig;
use crate::loader::FsLoader;
use crate::{EXIT_DIAGNOSTICS, EXIT_IO};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Diagnostics(Diagnostics),
    Message(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Diagnostics(_) | CliError::Message(_) => EXIT_DIAGNOSTICS,
        }
    }

    pub fn render(&self) -> String {
        match self {
            CliError::Io(msg) => format!("error: {msg}\n"),
            CliError::Diagnostics(diags) => render_all(diags),
            CliError::Message(msg) => format!("error: {msg}\n"),
        }
    }
}

pub struct Loaded {
    pub checked: CheckedProgram,
    /// Systems defined in the entry file itself, in source order, with a
    /// flag for "declares a Main spec".
    pub entry_systems: Vec<(String, bool)>,
}

pub fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let source = std::fs::read_to_string(&cfg.entry_file)
        .map_err(|e| CliError::Io(format!("{}: {e}", cfg.entry_file.display())))?;
    let file_label = cfg.entry_file.display().to_string();

    let tokens = tokenize(&source).map_err(|e| {
        CliError::Diagnostics(vec![seni_core::diag::Diagnostic::from_lex(&file_label, &e)])
    })?;
    let program = parse(tokens).map_err(|e| {
        CliError::Diagnostics(vec![seni_core::diag::Diagnostic::from_parse(
            &file_label,
            &e,
        )])
    })?;

    let entry_systems = program
        .systems
        .iter()
        .map(|s| {
            let has_main = s.specs.iter().any(|sp| sp.name == "Main");
            (s.name.clone(), has_main)
        })
        .collect();

    let mut search_paths: Vec<PathBuf> = cfg.search_paths.clone();
    if let Some(dir) = cfg.entry_file.parent() {
        let dir = if dir.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            dir.to_path_buf()
        };
        if !search_paths.contains(&dir) {
            search_paths.push(dir);
        }
    }
    let mut loader = FsLoader::new(search_paths);

    let entry_module = cfg
        .entry_file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "main".to_string());

    let linked = resolve_imports(&entry_module, &file_label, &program, &mut loader)
        .map_err(|e| CliError::Diagnostics(vec![e.to_diagnostic()]))?;
    let checked = check_program(&linked).map_err(CliError::Diagnostics)?;

    Ok(Loaded {
        checked,
        entry_systems,
    })
}

/// The system a command runs: `--system`, or the sole entry-file system with
/// a `Main` spec.
pub fn entry_system(cfg: &RunConfig, loaded: &Loaded) -> Result<String, CliError> {
    if let Some(name) = &cfg.system {
        if loaded.checked.system(name).is_none() {
            return Err(CliError::Message(format!("unknown system `{name}`")));
        }
        return Ok(name.clone());
    }
    let with_main: Vec<&String> = loaded
        .entry_systems
        .iter()
        .filter(|(_, has_main)| *has_main)
        .map(|(name, _)| name)
        .collect();
    match with_main.as_slice() {
        [sole] => Ok((*sole).clone()),
        [] => Err(CliError::Message(
            "no system with a Main spec in the entry file; pass --system".to_string(),
        )),
        _ => Err(CliError::Message(
            "multiple systems with a Main spec in the entry file; pass --system".to_string(),
        )),
    }
}

pub fn elaborate_system(
    checked: &BTreeMap<String, SystemDef>,
    entry: &str,
    args: &[String],
) -> Result<SystemInstance, CliError> {
    elaborate(checked, entry, args).map_err(|e| CliError::Message(e.to_string()))
}
