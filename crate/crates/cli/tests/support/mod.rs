//! Shared helpers for CLI tests: corpus location, the expectations manifest,
//! an in-process pipeline, and a seeded generator of small random systems.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use seni_cli::{Command, Format, RunConfig};
use seni_core::elab::{elaborate, SystemInstance};
use seni_core::rng::SplitMix64;
use seni_core::sema::{check_program, resolve_imports, CheckedProgram, MapLoader, PFormula};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_path(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

/// One line of `corpus/expectations.txt`.
#[derive(Debug, Clone)]
pub struct Expectation {
    pub name: String,
    pub argv: Vec<String>,
    pub exit: i32,
    pub substrings: Vec<String>,
}

pub fn parse_expectations() -> Vec<Expectation> {
    let text = std::fs::read_to_string(corpus_path("expectations.txt")).unwrap();
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(" :: ").collect();
        assert!(fields.len() >= 3, "malformed expectation: {line}");
        let argv: Vec<String> = fields[1].split_whitespace().map(String::from).collect();
        let exit: i32 = fields[2]
            .strip_prefix("exit=")
            .expect("exit=N field")
            .parse()
            .unwrap();
        out.push(Expectation {
            name: fields[0].to_string(),
            argv,
            exit,
            substrings: fields[3..].iter().map(|s| s.to_string()).collect(),
        });
    }
    out
}

/// Turn a manifest argv into a RunConfig (mirrors the clap surface).
pub fn config_from_argv(argv: &[String]) -> RunConfig {
    let mut iter = argv.iter().peekable();
    let verb = iter.next().expect("command verb").clone();
    let mut positionals: Vec<String> = Vec::new();
    let mut system = None;
    let mut args: Vec<String> = Vec::new();
    let mut max_states = 1_000_000usize;
    let mut format = Format::Text;
    let mut paths = Vec::new();
    let mut steps = 10usize;
    let mut seed = 0u64;
    while let Some(tok) = iter.next() {
        match tok.as_str() {
            "--system" => system = Some(iter.next().unwrap().clone()),
            "--args" => {
                args = iter.next().unwrap().split(',').map(String::from).collect()
            }
            "--max-states" => max_states = iter.next().unwrap().parse().unwrap(),
            "--format" => {
                format = match iter.next().unwrap().as_str() {
                    "json" => Format::Json,
                    _ => Format::Text,
                }
            }
            "--path" => paths.push(PathBuf::from(iter.next().unwrap())),
            "--steps" => steps = iter.next().unwrap().parse().unwrap(),
            "--seed" => seed = iter.next().unwrap().parse().unwrap(),
            other => positionals.push(other.to_string()),
        }
    }
    let file = corpus_path(&positionals[0]);
    let command = match verb.as_str() {
        "check" => Command::Check,
        "graph" => Command::Graph,
        "verify" => Command::Verify,
        "sat" => Command::Sat {
            formula: positionals[1].clone(),
        },
        "refine" => Command::Refine {
            abstract_name: positionals[1].clone(),
            refined_name: positionals[2].clone(),
        },
        "trace" => Command::Trace { steps, seed },
        other => panic!("unknown verb {other}"),
    };
    RunConfig {
        command,
        entry_file: file,
        system,
        args,
        max_states,
        format,
        search_paths: paths,
    }
}

/// In-memory pipeline for generated sources.
pub fn check_source(source: &str) -> Result<CheckedProgram, String> {
    let tokens = seni_core::lexer::tokenize(source).map_err(|e| e.to_string())?;
    let program = seni_core::parser::parse(tokens).map_err(|e| e.to_string())?;
    let mut loader = MapLoader {
        modules: BTreeMap::new(),
    };
    let linked = resolve_imports("gen", "gen.seni", &program, &mut loader)
        .map_err(|e| e.to_string())?;
    check_program(&linked).map_err(|d| seni_core::diag::render_all(&d))
}

pub fn instance_of(source: &str, entry: &str) -> SystemInstance {
    let checked = match check_source(source) {
        Ok(c) => c,
        Err(e) => panic!("generated source must check, got:\n{e}\nsource:\n{source}"),
    };
    match elaborate(&checked.systems, entry, &[]) {
        Ok(i) => i,
        Err(e) => panic!("generated source must elaborate, got {e}\nsource:\n{source}"),
    }
}

/// Description of one generated state variable.
enum GenVar {
    /// Counter mod `m`.
    IntMod { m: i64, init: i64 },
    Bool { init: bool },
    /// Nullable int toggled between `null` and small constants.
    NullableInt,
}

/// A generated system: the source text plus its prop names.
pub struct GeneratedSystem {
    pub source: String,
    pub prop_names: Vec<String>,
}

/// Deterministically generate a small, finite-state system. All integer
/// state lives in modular counters, so the reachable state space is finite;
/// the spec is an arbitrary sequencing/choice/always/parallel process.
pub fn generate_system(seed: u64) -> GeneratedSystem {
    let mut rng = SplitMix64::new(seed.wrapping_mul(2654435761).wrapping_add(1));
    let n_vars = 1 + rng.next_below(3);
    let vars: Vec<GenVar> = (0..n_vars)
        .map(|_| match rng.next_below(3) {
            0 => GenVar::IntMod {
                m: 2 + rng.next_below(3) as i64,
                init: rng.next_below(2) as i64,
            },
            1 => GenVar::Bool {
                init: rng.next_below(2) == 1,
            },
            _ => GenVar::NullableInt,
        })
        .collect();

    let mut decls = String::new();
    for (i, var) in vars.iter().enumerate() {
        match var {
            GenVar::IntMod { init, .. } => {
                decls.push_str(&format!("    state int v{i}: {init};\n"))
            }
            GenVar::Bool { init } => decls.push_str(&format!("    state bool v{i}: {init};\n")),
            GenVar::NullableInt => {
                decls.push_str(&format!("    state int v{i}: null;\n"));
            }
        }
    }

    let n_actions = 1 + rng.next_below(3);
    let mut actions = String::new();
    let mut action_names = Vec::new();
    for a in 0..n_actions {
        let name = format!("A{a}");
        let mut body = String::new();
        let n_assigns = 1 + rng.next_below(2);
        for _ in 0..n_assigns {
            let i = rng.next_below(vars.len());
            match &vars[i] {
                GenVar::IntMod { m, .. } => {
                    if rng.next_below(2) == 0 {
                        let c = 1 + rng.next_below(2);
                        body.push_str(&format!("        @.v{i}: (v{i} + {c}) mod {m};\n"));
                    } else {
                        body.push_str(&format!("        @.v{i}: {};\n", rng.next_below(3)));
                    }
                }
                GenVar::Bool { .. } => match rng.next_below(3) {
                    0 => body.push_str(&format!("        @.v{i}: true;\n")),
                    1 => body.push_str(&format!("        @.v{i}: false;\n")),
                    _ => body.push_str(&format!("        @.v{i}: !v{i};\n")),
                },
                GenVar::NullableInt => {
                    if rng.next_below(2) == 0 {
                        body.push_str(&format!("        @.v{i}: null;\n"));
                    } else {
                        body.push_str(&format!("        @.v{i}: {};\n", rng.next_below(3)));
                    }
                }
            }
        }
        actions.push_str(&format!("    action {name} {{\n{body}    }}\n"));
        action_names.push(name);
    }

    // props over the variables
    let n_props = 1 + rng.next_below(3);
    let mut props = String::new();
    let mut prop_names = Vec::new();
    for p in 0..n_props {
        let name = format!("P{p}");
        let body = gen_bool_expr(&mut rng, &vars, 2);
        props.push_str(&format!("    prop {name} {{ {body} }}\n"));
        prop_names.push(name);
    }

    let spec = gen_process(&mut rng, &action_names, 3);

    let source = format!(
        "system Gen {{\n{decls}{actions}{props}    spec Main {{ {spec} }}\n}}\n"
    );
    GeneratedSystem { source, prop_names }
}

fn gen_bool_expr(rng: &mut SplitMix64, vars: &[GenVar], depth: usize) -> String {
    if depth == 0 || rng.next_below(3) == 0 {
        // atom
        let i = rng.next_below(vars.len());
        return match &vars[i] {
            GenVar::IntMod { m, .. } => format!("v{i} = {}", rng.next_below(*m as usize)),
            GenVar::Bool { .. } => format!("v{i}"),
            GenVar::NullableInt => {
                if rng.next_below(2) == 0 {
                    format!("v{i} = null")
                } else {
                    format!("v{i} /= null")
                }
            }
        };
    }
    match rng.next_below(4) {
        0 => format!("!({})", gen_bool_expr(rng, vars, depth - 1)),
        1 => format!(
            "({}) & ({})",
            gen_bool_expr(rng, vars, depth - 1),
            gen_bool_expr(rng, vars, depth - 1)
        ),
        2 => format!(
            "({}) | ({})",
            gen_bool_expr(rng, vars, depth - 1),
            gen_bool_expr(rng, vars, depth - 1)
        ),
        _ => format!(
            "({}) => ({})",
            gen_bool_expr(rng, vars, depth - 1),
            gen_bool_expr(rng, vars, depth - 1)
        ),
    }
}

fn gen_process(rng: &mut SplitMix64, actions: &[String], depth: usize) -> String {
    if depth == 0 || rng.next_below(3) == 0 {
        return actions[rng.next_below(actions.len())].clone();
    }
    match rng.next_below(4) {
        0 => format!(
            "({}.{})",
            gen_process(rng, actions, depth - 1),
            gen_process(rng, actions, depth - 1)
        ),
        1 => format!(
            "({} | {})",
            gen_process(rng, actions, depth - 1),
            gen_process(rng, actions, depth - 1)
        ),
        2 => format!(
            "({} || {})",
            gen_process(rng, actions, depth - 1),
            gen_process(rng, actions, depth - 1)
        ),
        _ => format!("always ({})", gen_process(rng, actions, depth - 1)),
    }
}

/// Random propositional formula over the given prop names.
pub fn generate_formula(rng: &mut SplitMix64, props: &[String], depth: usize) -> PFormula {
    if depth == 0 || props.is_empty() || rng.next_below(4) == 0 {
        return match rng.next_below(if props.is_empty() { 2 } else { 4 }) {
            0 => PFormula::True,
            1 => PFormula::False,
            _ => PFormula::Ref(props[rng.next_below(props.len())].clone()),
        };
    }
    match rng.next_below(4) {
        0 => PFormula::Not(Box::new(generate_formula(rng, props, depth - 1))),
        1 => PFormula::And(
            Box::new(generate_formula(rng, props, depth - 1)),
            Box::new(generate_formula(rng, props, depth - 1)),
        ),
        2 => PFormula::Or(
            Box::new(generate_formula(rng, props, depth - 1)),
            Box::new(generate_formula(rng, props, depth - 1)),
        ),
        _ => PFormula::Implies(
            Box::new(generate_formula(rng, props, depth - 1)),
            Box::new(generate_formula(rng, props, depth - 1)),
        ),
    }
}

/// Evaluate a formula with an explicit assignment of prop names.
pub fn eval_formula_with(f: &PFormula, assignment: &dyn Fn(&str) -> bool) -> bool {
    match f {
        PFormula::True => true,
        PFormula::False => false,
        PFormula::Ref(name) => assignment(name),
        PFormula::Not(x) => !eval_formula_with(x, assignment),
        PFormula::And(a, b) => {
            eval_formula_with(a, assignment) && eval_formula_with(b, assignment)
        }
        PFormula::Or(a, b) => eval_formula_with(a, assignment) || eval_formula_with(b, assignment),
        PFormula::Implies(a, b) => {
            !eval_formula_with(a, assignment) || eval_formula_with(b, assignment)
        }
    }
}

/// Independent BFS depths, recomputed from the edge list only.
pub fn bfs_depths(lts: &seni_core::explore::Lts) -> Vec<usize> {
    let mut depth = vec![usize::MAX; lts.nodes.len()];
    depth[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for e in lts.edges.iter().filter(|e| e.src as usize == u) {
            if depth[e.dst as usize] == usize::MAX {
                depth[e.dst as usize] = depth[u] + 1;
                queue.push_back(e.dst as usize);
            }
        }
    }
    depth
}

/// Load + link + check a corpus entry module in-process.
pub fn corpus_checked(entry: &str) -> CheckedProgram {
    let path = corpus_path(&format!("{entry}.seni"));
    let source = std::fs::read_to_string(&path).unwrap();
    let tokens = seni_core::lexer::tokenize(&source).unwrap();
    let program = seni_core::parser::parse(tokens).unwrap();
    let mut loader = seni_cli::loader::FsLoader::new(vec![corpus_dir()]);
    let linked = resolve_imports(entry, &path.display().to_string(), &program, &mut loader)
        .unwrap_or_else(|e| panic!("{entry}: {e}"));
    check_program(&linked)
        .unwrap_or_else(|d| panic!("{entry}:\n{}", seni_core::diag::render_all(&d)))
}

/// Elaborate a corpus system.
pub fn corpus_instance(entry: &str, args: &[&str]) -> SystemInstance {
    let checked = corpus_checked(entry);
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    elaborate(&checked.systems, entry, &args).unwrap_or_else(|e| panic!("{entry}: {e}"))
}
