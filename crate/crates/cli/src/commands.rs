//! The check / graph / verify / sat / refine / trace commands.

use std::collections::BTreeMap;

use seni_core::explore::{build_lts_of, export_dot, random_walk, Lts};
use seni_core::refine::{check_simulation, derive_action_map, ActionMap, SimOptions, SimulationResult};
use seni_core::sema::SystemDef;
use seni_core::verify::{check_property, find_satisfying_state, parse_formula, Verdict};
use serde_json::json;

use crate::config::{Command, Format, RunConfig};
use crate::pipeline::{elaborate_system, entry_system, load, CliError, Loaded};
use crate::render;
use crate::{EXIT_DIAGNOSTICS, EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_OK};

/// Full output of one command run, ready to print.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub output: String,
    pub exit: i32,
}

impl CommandOutput {
    fn ok(output: String) -> Self {
        CommandOutput {
            output,
            exit: EXIT_OK,
        }
    }
}

/// Run one command to completion. Never panics on user input; all failures
/// are rendered with their exit code.
pub fn run(cfg: &RunConfig) -> CommandOutput {
    let result = match &cfg.command {
        Command::Check => cmd_check(cfg),
        Command::Graph => cmd_graph(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sat { formula } => cmd_sat(cfg, formula),
        Command::Refine {
            abstract_name,
            refined_name,
        } => cmd_refine(cfg, abstract_name, refined_name),
        Command::Trace { steps, seed } => cmd_trace(cfg, *steps, *seed),
    };
    result.unwrap_or_else(|err| CommandOutput {
        output: err.render(),
        exit: err.exit_code(),
    })
}

fn cmd_check(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match (load(cfg), cfg.format) {
        (Ok(_), Format::Text) => Ok(CommandOutput::ok(String::new())),
        (Ok(_), Format::Json) => Ok(CommandOutput::ok(format!(
            "{}\n",
            json!({"command": "check", "diagnostics": []})
        ))),
        (Err(CliError::Diagnostics(diags)), Format::Json) => {
            let rendered: Vec<_> = diags
                .iter()
                .map(|d| {
                    json!({
                        "file": d.file,
                        "line": d.line,
                        "col": d.col,
                        "message": d.message,
                    })
                })
                .collect();
            Ok(CommandOutput {
                output: format!("{}\n", json!({"command": "check", "diagnostics": rendered})),
                exit: EXIT_DIAGNOSTICS,
            })
        }
        (Err(e), _) => Err(e),
    }
}

/// Elaborate the configured entry system and build the LTS of one spec.
fn entry_lts(cfg: &RunConfig, loaded: &Loaded, spec: &str) -> Result<(seni_core::elab::SystemInstance, Lts), CliError> {
    let entry = entry_system(cfg, loaded)?;
    let sys = elaborate_system(&loaded.checked.systems, &entry, &cfg.args)?;
    let process = sys
        .spec_processes
        .get(spec)
        .cloned()
        .ok_or_else(|| CliError::Message(format!("system `{entry}` has no spec `{spec}`")))?;
    let lts = build_lts_of(&sys, process, cfg.max_states)
        .map_err(|e| CliError::Message(e.to_string()))?;
    Ok((sys, lts))
}

fn cmd_graph(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let loaded = load(cfg)?;
    let (sys, lts) = entry_lts(cfg, &loaded, "Main")?;
    match cfg.format {
        Format::Text => Ok(CommandOutput::ok(export_dot(&lts))),
        Format::Json => Ok(CommandOutput::ok(format!(
            "{}\n",
            json!({
                "command": "graph",
                "graph": render::graph_json(&lts, &sys),
                "stats": render::stats_json(&lts),
            })
        ))),
    }
}

fn cmd_verify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let loaded = load(cfg)?;
    let entry = entry_system(cfg, &loaded)?;
    let sys = elaborate_system(&loaded.checked.systems, &entry, &cfg.args)?;

    // one LTS per referenced spec, in first-use order
    let mut lts_by_spec: BTreeMap<String, Lts> = BTreeMap::new();
    let mut spec_order: Vec<String> = Vec::new();
    for prop in &sys.static_props {
        if !lts_by_spec.contains_key(&prop.spec) {
            let process = sys
                .spec_processes
                .get(&prop.spec)
                .cloned()
                .ok_or_else(|| {
                    CliError::Message(format!("system `{entry}` has no spec `{}`", prop.spec))
                })?;
            let lts = build_lts_of(&sys, process, cfg.max_states)
                .map_err(|e| CliError::Message(e.to_string()))?;
            lts_by_spec.insert(prop.spec.clone(), lts);
            spec_order.push(prop.spec.clone());
        }
    }

    let mut text = String::new();
    let mut verdicts_json = Vec::new();
    let mut any_violated = false;
    let mut any_inconclusive = false;
    for prop in &sys.static_props {
        let lts = &lts_by_spec[&prop.spec];
        let verdict = check_property(prop, lts).map_err(|e| CliError::Message(e.to_string()))?;
        match &verdict {
            Verdict::Violated { .. } => any_violated = true,
            Verdict::Inconclusive { .. } => any_inconclusive = true,
            Verdict::Holds => {}
        }
        text.push_str(&render::verdict_text(&prop.name, &verdict, lts));
        verdicts_json.push(render::verdict_json(&prop.name, &verdict, lts));
    }
    for spec in &spec_order {
        let lts = &lts_by_spec[spec];
        if spec_order.len() == 1 {
            text.push_str(&render::stats_text(lts));
        } else {
            text.push_str(&format!("[{spec}] {}", render::stats_text(lts)));
        }
    }

    let exit = if any_violated {
        EXIT_NEGATIVE
    } else if any_inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };

    let output = match cfg.format {
        Format::Text => text,
        Format::Json => {
            let stats = spec_order
                .first()
                .map(|s| render::stats_json(&lts_by_spec[s]))
                .unwrap_or(json!(null));
            format!(
                "{}\n",
                json!({
                    "command": "verify",
                    "verdicts": verdicts_json,
                    "stats": stats,
                })
            )
        }
    };
    Ok(CommandOutput { output, exit })
}

fn cmd_sat(cfg: &RunConfig, formula_text: &str) -> Result<CommandOutput, CliError> {
    let formula = parse_formula(formula_text).map_err(CliError::Message)?;
    let loaded = load(cfg)?;
    let (_, lts) = entry_lts(cfg, &loaded, "Main")?;
    let found = find_satisfying_state(&formula, &lts)
        .map_err(|e| CliError::Message(e.to_string()))?;

    let (text, exit, result_json) = match found {
        Some(node) => {
            let model = &lts.nodes[node].state;
            let text = format!(
                "SAT (node {node})\n{}",
                render::state_vector_text(model, "  ")
            );
            (
                text,
                EXIT_OK,
                json!({"result": "SAT", "node": node, "model": render::state_vector_json(model)}),
            )
        }
        None => match lts.truncated {
            Some(bound) => (
                format!("UNSAT (within explored bound={bound}, inconclusive)\n"),
                EXIT_INCONCLUSIVE,
                json!({"result": "UNSAT", "inconclusive": true, "bound": bound}),
            ),
            None => (
                "UNSAT\n".to_string(),
                EXIT_NEGATIVE,
                json!({"result": "UNSAT", "inconclusive": false}),
            ),
        },
    };

    let output = match cfg.format {
        Format::Text => text,
        Format::Json => format!(
            "{}\n",
            json!({
                "command": "sat",
                "formula": formula_text,
                "outcome": result_json,
                "stats": render::stats_json(&lts),
            })
        ),
    };
    Ok(CommandOutput { output, exit })
}

/// Compose action maps along the `refines` chain from `refined` up to
/// `abstract_name`.
fn chain_action_map(
    systems: &BTreeMap<String, SystemDef>,
    abstract_name: &str,
    refined_name: &str,
) -> Result<ActionMap, CliError> {
    if abstract_name == refined_name {
        return Ok(ActionMap::identity());
    }
    let mut chain: Vec<&SystemDef> = Vec::new();
    let mut cur = systems
        .get(refined_name)
        .ok_or_else(|| CliError::Message(format!("unknown system `{refined_name}`")))?;
    chain.push(cur);
    while let Some(parent_name) = &cur.refines {
        let parent = systems
            .get(parent_name)
            .ok_or_else(|| CliError::Message(format!("unknown system `{parent_name}`")))?;
        chain.push(parent);
        cur = parent;
        if parent_name == abstract_name {
            break;
        }
    }
    if chain.last().map(|d| d.name.as_str()) != Some(abstract_name) {
        return Err(CliError::Message(format!(
            "system `{refined_name}` does not refine `{abstract_name}`"
        )));
    }
    // adjacent maps, innermost (refined side) first
    let mut map = derive_action_map(chain[1], chain[0])
        .map_err(|e| CliError::Message(e.to_string()))?;
    for window in chain.windows(2).skip(1) {
        let step = derive_action_map(window[1], window[0])
            .map_err(|e| CliError::Message(e.to_string()))?;
        map = map.compose(&step);
    }
    Ok(map)
}

fn cmd_refine(
    cfg: &RunConfig,
    abstract_name: &str,
    refined_name: &str,
) -> Result<CommandOutput, CliError> {
    let loaded = load(cfg)?;
    for name in [abstract_name, refined_name] {
        if loaded.checked.system(name).is_none() {
            return Err(CliError::Message(format!("unknown system `{name}`")));
        }
    }
    let map = chain_action_map(&loaded.checked.systems, abstract_name, refined_name)?;

    let abstract_sys = elaborate_system(&loaded.checked.systems, abstract_name, &cfg.args)?;
    let refined_sys = elaborate_system(&loaded.checked.systems, refined_name, &cfg.args)?;
    let abstract_lts = build_lts_of(&abstract_sys, abstract_sys.main.clone(), cfg.max_states)
        .map_err(|e| CliError::Message(e.to_string()))?;
    let refined_lts = build_lts_of(&refined_sys, refined_sys.main.clone(), cfg.max_states)
        .map_err(|e| CliError::Message(e.to_string()))?;

    let result = check_simulation(&abstract_lts, &refined_lts, &map, SimOptions::default())
        .map_err(|e| CliError::Message(e.to_string()))?;

    let exit = match result {
        SimulationResult::Simulated { .. } => EXIT_OK,
        SimulationResult::NotSimulated { .. } => EXIT_NEGATIVE,
    };
    let output = match cfg.format {
        Format::Text => render::simulation_text(&result),
        Format::Json => format!(
            "{}\n",
            json!({
                "command": "refine",
                "abstract": abstract_name,
                "refined": refined_name,
                "outcome": render::simulation_json(&result),
            })
        ),
    };
    Ok(CommandOutput { output, exit })
}

fn cmd_trace(cfg: &RunConfig, steps: usize, seed: u64) -> Result<CommandOutput, CliError> {
    let loaded = load(cfg)?;
    let entry = entry_system(cfg, &loaded)?;
    let sys = elaborate_system(&loaded.checked.systems, &entry, &cfg.args)?;
    let walk = random_walk(&sys, steps, seed).map_err(|e| CliError::Message(e.to_string()))?;

    match cfg.format {
        Format::Text => {
            let mut out = String::from("initial:\n");
            out.push_str(&render::state_vector_text(&sys.initial, "  "));
            let mut prev = sys.initial.clone();
            for step in &walk {
                out.push_str(&step.action);
                out.push_str(" -> ");
                out.push_str(&render::state_diff(&prev, &step.state));
                out.push('\n');
                prev = step.state.clone();
            }
            Ok(CommandOutput::ok(out))
        }
        Format::Json => {
            let mut steps_json = Vec::new();
            let mut prev = sys.initial.clone();
            for step in &walk {
                steps_json.push(json!({
                    "action": step.action,
                    "changes": render::state_diff_json(&prev, &step.state),
                }));
                prev = step.state.clone();
            }
            Ok(CommandOutput::ok(format!(
                "{}\n",
                json!({
                    "command": "trace",
                    "seed": seed,
                    "initial": render::state_vector_json(&sys.initial),
                    "steps": steps_json,
                })
            )))
        }
    }
}
