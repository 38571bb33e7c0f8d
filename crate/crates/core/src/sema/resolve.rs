//! Import resolution.
//!
//! `import X;` links the system named `X`. If `X` is not already defined by
//! an earlier file, the loader is asked for module `X` (the CLI maps this to
//! `X.seni` on the search paths). The import graph must be acyclic even when
//! everything would resolve by registration order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{ProgramAst, SystemAst};
use crate::diag::Diagnostic;
use crate::lexer::{tokenize, LexError};
use crate::parser::{parse, ParseError};
use crate::token::Span;

/// Provides module sources by name. Implementations decide how names map to
/// storage; the crate itself never touches the filesystem.
pub trait ModuleLoader {
    /// `Ok(Some((label, source)))` on success, `Ok(None)` when the module
    /// does not exist, `Err` for environment failures. `label` is used in
    /// diagnostics (typically the file path).
    fn load(&mut self, name: &str) -> Result<Option<(String, String)>, String>;
}

/// In-memory loader for tests and embedded use.
pub struct MapLoader {
    pub modules: alloc::collections::BTreeMap<String, String>,
}

impl ModuleLoader for MapLoader {
    fn load(&mut self, name: &str) -> Result<Option<(String, String)>, String> {
        Ok(self
            .modules
            .get(name)
            .map(|src| (format!("{}.seni", name), src.clone())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveError {
    /// No file provides the imported system.
    MissingImport {
        name: String,
        imported_by: String,
        file: String,
        span: Span,
    },
    /// Import cycle, listed as the module path `[A, B, ..., A]`.
    CyclicImport {
        path: Vec<String>,
        file: String,
        span: Span,
    },
    /// Two files (or one file twice) define the same system name.
    DuplicateSystem {
        name: String,
        file: String,
        span: Span,
    },
    Lex { file: String, error: LexError },
    Parse { file: String, error: ParseError },
    Io {
        module: String,
        message: String,
        file: String,
        span: Span,
    },
}

impl ResolveError {
    /// Location-bearing diagnostic form.
    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            ResolveError::MissingImport { name, file, span, .. } => Diagnostic::error(
                file,
                *span,
                alloc::format!("unresolved import `{}`", name),
            ),
            ResolveError::CyclicImport { path, file, span } => {
                let mut msg = String::from("cyclic import: ");
                for (i, m) in path.iter().enumerate() {
                    if i > 0 {
                        msg.push_str(" -> ");
                    }
                    msg.push_str(m);
                }
                Diagnostic::error(file, *span, msg)
            }
            ResolveError::DuplicateSystem { name, file, span } => Diagnostic::error(
                file,
                *span,
                alloc::format!("system `{}` defined more than once", name),
            ),
            ResolveError::Lex { file, error } => Diagnostic::from_lex(file, error),
            ResolveError::Parse { file, error } => Diagnostic::from_parse(file, error),
            ResolveError::Io { module, message, file, span } => Diagnostic::error(
                file,
                *span,
                alloc::format!("cannot load module `{}`: {}", module, message),
            ),
        }
    }
}

impl core::fmt::Display for ResolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ResolveError::MissingImport { name, imported_by, .. } => {
                write!(f, "unresolved import `{}` (imported by {})", name, imported_by)
            }
            ResolveError::CyclicImport { path, .. } => {
                write!(f, "cyclic import: ")?;
                for (i, m) in path.iter().enumerate() {
                    if i > 0 {
                        write!(f, " -> ")?;
                    }
                    write!(f, "{}", m)?;
                }
                Ok(())
            }
            ResolveError::DuplicateSystem { name, file, .. } => {
                write!(f, "system `{}` defined more than once (in {})", name, file)
            }
            ResolveError::Lex { file, error } => write!(f, "{}:{}", file, error),
            ResolveError::Parse { file, error } => write!(f, "{}:{}", file, error),
            ResolveError::Io { module, message, .. } => {
                write!(f, "cannot load module `{}`: {}", module, message)
            }
        }
    }
}

/// One system together with the file it came from.
#[derive(Debug, Clone)]
pub struct LinkedSystem {
    pub ast: SystemAst,
    pub file: String,
}

/// All transitively referenced systems, in load order (entry file first).
#[derive(Debug, Clone)]
pub struct LinkedProgram {
    pub systems: Vec<LinkedSystem>,
}

impl LinkedProgram {
    pub fn system(&self, name: &str) -> Option<&LinkedSystem> {
        self.systems.iter().find(|s| s.ast.name == name)
    }
}

enum ModuleState {
    Loading,
    Done,
}

struct Resolver<'a> {
    loader: &'a mut dyn ModuleLoader,
    systems: Vec<LinkedSystem>,
    modules: alloc::collections::BTreeMap<String, ModuleState>,
    stack: Vec<String>,
}

/// Link the entry program with everything it transitively imports.
///
/// `entry_module` names the entry file (its stem) for cycle reporting, and
/// `entry_file` labels its diagnostics.
pub fn resolve_imports(
    entry_module: &str,
    entry_file: &str,
    entry: &ProgramAst,
    loader: &mut dyn ModuleLoader,
) -> Result<LinkedProgram, ResolveError> {
    let mut r = Resolver {
        loader,
        systems: Vec::new(),
        modules: alloc::collections::BTreeMap::new(),
        stack: Vec::new(),
    };
    r.modules
        .insert(entry_module.to_string(), ModuleState::Loading);
    r.stack.push(entry_module.to_string());
    r.register_systems(entry, entry_file)?;
    r.visit_imports(entry_module, entry_file, entry)?;
    r.stack.pop();
    r.modules
        .insert(entry_module.to_string(), ModuleState::Done);
    Ok(LinkedProgram { systems: r.systems })
}

impl<'a> Resolver<'a> {
    fn register_systems(&mut self, program: &ProgramAst, file: &str) -> Result<(), ResolveError> {
        for sys in &program.systems {
            if self.systems.iter().any(|s| s.ast.name == sys.name) {
                return Err(ResolveError::DuplicateSystem {
                    name: sys.name.clone(),
                    file: file.to_string(),
                    span: sys.name_span,
                });
            }
            self.systems.push(LinkedSystem {
                ast: sys.clone(),
                file: file.to_string(),
            });
        }
        Ok(())
    }

    fn visit_imports(
        &mut self,
        module: &str,
        module_file: &str,
        program: &ProgramAst,
    ) -> Result<(), ResolveError> {
        for import in &program.imports {
            let name = import.name.as_str();
            match self.modules.get(name) {
                Some(ModuleState::Loading) => {
                    let mut cycle: Vec<String> = self
                        .stack
                        .iter()
                        .skip_while(|m| m.as_str() != name)
                        .cloned()
                        .collect();
                    cycle.push(name.to_string());
                    return Err(ResolveError::CyclicImport {
                        path: cycle,
                        file: module_file.to_string(),
                        span: import.span,
                    });
                }
                Some(ModuleState::Done) => continue,
                None => {}
            }

            // A system already defined by an earlier file satisfies the
            // import without loading another module.
            if self.systems.iter().any(|s| s.ast.name == name) {
                self.modules.insert(name.to_string(), ModuleState::Done);
                continue;
            }

            let loaded = self
                .loader
                .load(name)
                .map_err(|message| ResolveError::Io {
                    module: name.to_string(),
                    message,
                    file: module_file.to_string(),
                    span: import.span,
                })?;
            let Some((file, source)) = loaded else {
                return Err(ResolveError::MissingImport {
                    name: name.to_string(),
                    imported_by: module.to_string(),
                    file: module_file.to_string(),
                    span: import.span,
                });
            };

            let tokens = tokenize(&source).map_err(|error| ResolveError::Lex {
                file: file.clone(),
                error,
            })?;
            let parsed = parse(tokens).map_err(|error| ResolveError::Parse {
                file: file.clone(),
                error,
            })?;

            self.modules.insert(name.to_string(), ModuleState::Loading);
            self.stack.push(name.to_string());
            self.register_systems(&parsed, &file)?;
            self.visit_imports(name, &file, &parsed)?;
            self.stack.pop();
            self.modules.insert(name.to_string(), ModuleState::Done);

            if !self.systems.iter().any(|s| s.ast.name == name) {
                return Err(ResolveError::MissingImport {
                    name: name.to_string(),
                    imported_by: module.to_string(),
                    file: module_file.to_string(),
                    span: import.span,
                });
            }
        }
        Ok(())
    }
}
