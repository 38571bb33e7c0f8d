//! Filesystem module loader: `import X;` resolves to `X.seni` on the search
//! paths, first match wins.

use std::path::PathBuf;

use seni_core::sema::ModuleLoader;

pub struct FsLoader {
    pub search_paths: Vec<PathBuf>,
}

impl FsLoader {
    pub fn new(search_paths: Vec<PathBuf>) -> Self {
        FsLoader { search_paths }
    }
}

impl ModuleLoader for FsLoader {
    fn load(&mut self, name: &str) -> Result<Option<(String, String)>, String> {
        for dir in &self.search_paths {
            let candidate = dir.join(format!("{name}.seni"));
            if candidate.is_file() {
                let source = std::fs::read_to_string(&candidate)
                    .map_err(|e| format!("{}: {e}", candidate.display()))?;
                return Ok(Some((candidate.display().to_string(), source)));
            }
        }
        Ok(None)
    }
}
