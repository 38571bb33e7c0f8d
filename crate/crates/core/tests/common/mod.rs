//! Shared pipeline helpers for integration tests.

use std::collections::BTreeMap;

use seni_core::diag::Diagnostics;
use seni_core::elab::{elaborate, SystemInstance};
use seni_core::lexer::tokenize;
use seni_core::parser::parse;
use seni_core::sema::{check_program, resolve_imports, CheckedProgram, MapLoader};

pub const PHILOSOPHER_ABSTRACT: &str = include_str!("../../../../corpus/PhilosopherAbstract.seni");
pub const PHILOSOPHER: &str = include_str!("../../../../corpus/Philosopher.seni");
pub const FORK: &str = include_str!("../../../../corpus/Fork.seni");
pub const TABLE: &str = include_str!("../../../../corpus/Table.seni");
pub const PHILOSOPHER_STUCK: &str = include_str!("../../../../corpus/PhilosopherStuck.seni");
pub const PHILOSOPHER_FINE: &str = include_str!("../../../../corpus/PhilosopherFine.seni");

/// All corpus modules, keyed by import name.
pub fn corpus_modules() -> Vec<(&'static str, &'static str)> {
    vec![
        ("PhilosopherAbstract", PHILOSOPHER_ABSTRACT),
        ("Philosopher", PHILOSOPHER),
        ("Fork", FORK),
        ("Table", TABLE),
        ("PhilosopherStuck", PHILOSOPHER_STUCK),
        ("PhilosopherFine", PHILOSOPHER_FINE),
    ]
}

/// Run lex+parse+link+check for an entry module within a module map.
pub fn check(
    entry: &str,
    modules: &[(&str, &str)],
) -> Result<CheckedProgram, Diagnostics> {
    let source = modules
        .iter()
        .find(|(name, _)| *name == entry)
        .map(|(_, src)| *src)
        .expect("entry module present");
    let tokens = tokenize(source).expect("entry lexes");
    let program = parse(tokens).expect("entry parses");
    let mut loader = MapLoader {
        modules: modules
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect::<BTreeMap<_, _>>(),
    };
    let linked = resolve_imports(entry, &format!("{entry}.seni"), &program, &mut loader)
        .expect("imports resolve");
    check_program(&linked)
}

/// Check a single stand-alone source.
pub fn check_single(source: &str) -> Result<CheckedProgram, Diagnostics> {
    let tokens = match tokenize(source) {
        Ok(t) => t,
        Err(e) => panic!("lex error: {e}"),
    };
    let program = match parse(tokens) {
        Ok(p) => p,
        Err(e) => panic!("parse error: {e}"),
    };
    let mut loader = MapLoader {
        modules: BTreeMap::new(),
    };
    let linked =
        resolve_imports("main", "main.seni", &program, &mut loader).expect("imports resolve");
    check_program(&linked)
}

/// Full pipeline to an elaborated instance.
pub fn instance(entry: &str, modules: &[(&str, &str)], args: &[&str]) -> SystemInstance {
    let program = check(entry, modules).expect("checks clean");
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    elaborate(&program.systems, entry, &args).expect("elaborates")
}

/// Elaborate a single-source system named `entry`.
pub fn instance_single(source: &str, entry: &str, args: &[&str]) -> SystemInstance {
    let program = match check_single(source) {
        Ok(p) => p,
        Err(diags) => panic!(
            "expected clean check:\n{}",
            seni_core::diag::render_all(&diags)
        ),
    };
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    elaborate(&program.systems, entry, &args).expect("elaborates")
}
