//! Text and JSON renderings of verdicts, traces, models, and graphs.

use seni_core::elab::{StateVector, SystemInstance};
use seni_core::explore::{Lts, Trace};
use seni_core::refine::SimulationResult;
use seni_core::verify::Verdict;
use serde_json::{json, Value as Json};

/// `path: old => new, ...` for every top-level state entry that changed.
pub fn state_diff(before: &StateVector, after: &StateVector) -> String {
    let diffs = before.diff(after);
    if diffs.is_empty() {
        return "(no state change)".to_string();
    }
    diffs
        .iter()
        .map(|(path, old, new)| format!("{path}: {old} => {new}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn state_diff_json(before: &StateVector, after: &StateVector) -> Json {
    Json::Array(
        before
            .diff(after)
            .iter()
            .map(|(path, old, new)| {
                json!({
                    "path": path,
                    "from": old.to_string(),
                    "to": new.to_string(),
                })
            })
            .collect(),
    )
}

/// One `action -> state-diff` line per step.
pub fn trace_text(trace: &Trace, lts: &Lts, indent: &str) -> String {
    let mut out = String::new();
    let mut prev = 0usize;
    for &edge_idx in &trace.steps {
        let edge = &lts.edges[edge_idx as usize];
        let before = &lts.nodes[prev].state;
        let after = &lts.nodes[edge.dst as usize].state;
        out.push_str(indent);
        out.push_str(lts.action_name(edge));
        out.push_str(" -> ");
        out.push_str(&state_diff(before, after));
        out.push('\n');
        prev = edge.dst as usize;
    }
    out
}

pub fn trace_json(trace: &Trace, lts: &Lts) -> Json {
    let mut steps = Vec::new();
    let mut prev = 0usize;
    for &edge_idx in &trace.steps {
        let edge = &lts.edges[edge_idx as usize];
        steps.push(json!({
            "action": lts.action_name(edge),
            "changes": state_diff_json(&lts.nodes[prev].state, &lts.nodes[edge.dst as usize].state),
        }));
        prev = edge.dst as usize;
    }
    Json::Array(steps)
}

pub fn verdict_status(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::Holds => "HOLDS",
        Verdict::Violated { .. } => "VIOLATED",
        Verdict::Inconclusive { .. } => "INCONCLUSIVE",
    }
}

pub fn verdict_text(name: &str, verdict: &Verdict, lts: &Lts) -> String {
    match verdict {
        Verdict::Holds => format!("{name}: HOLDS\n"),
        Verdict::Violated { trace, .. } => {
            format!("{name}: VIOLATED\n{}", trace_text(trace, lts, "  "))
        }
        Verdict::Inconclusive { bound } => format!("{name}: INCONCLUSIVE (bound={bound})\n"),
    }
}

pub fn verdict_json(name: &str, verdict: &Verdict, lts: &Lts) -> Json {
    match verdict {
        Verdict::Holds => json!({"name": name, "status": "HOLDS"}),
        Verdict::Violated { node, trace } => json!({
            "name": name,
            "status": "VIOLATED",
            "node": node,
            "trace": trace_json(trace, lts),
        }),
        Verdict::Inconclusive { bound } => json!({
            "name": name,
            "status": "INCONCLUSIVE",
            "bound": bound,
        }),
    }
}

pub fn stats_text(lts: &Lts) -> String {
    format!(
        "stats: configurations={} states={} edges={} truncated={}\n",
        lts.nodes.len(),
        lts.distinct_states,
        lts.edges.len(),
        match lts.truncated {
            Some(bound) => format!("at {bound}"),
            None => "no".to_string(),
        }
    )
}

pub fn stats_json(lts: &Lts) -> Json {
    json!({
        "nodes": lts.nodes.len(),
        "distinctStates": lts.distinct_states,
        "edges": lts.edges.len(),
        "truncated": lts.truncated.is_some(),
        "bound": lts.truncated,
    })
}

pub fn state_vector_text(state: &StateVector, indent: &str) -> String {
    let mut out = String::new();
    for (path, value) in state.iter() {
        out.push_str(indent);
        out.push_str(path);
        out.push_str(" = ");
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

pub fn state_vector_json(state: &StateVector) -> Json {
    let mut map = serde_json::Map::new();
    for (path, value) in state.iter() {
        map.insert(path.clone(), Json::String(value.to_string()));
    }
    Json::Object(map)
}

pub fn simulation_text(result: &SimulationResult) -> String {
    match result {
        SimulationResult::Simulated { relation_size } => {
            format!("SIMULATED (|R|={relation_size})\n")
        }
        SimulationResult::NotSimulated {
            refined_node,
            abstract_candidates,
            action,
            trace,
        } => {
            let mut out = String::from("NOT SIMULATED\n");
            for step in trace {
                out.push_str("  ");
                out.push_str(step);
                out.push('\n');
            }
            out.push_str(&format!(
                "  offending observable: {action} (refined node {refined_node}, abstract candidates {:?})\n",
                abstract_candidates
            ));
            out
        }
    }
}

pub fn simulation_json(result: &SimulationResult) -> Json {
    match result {
        SimulationResult::Simulated { relation_size } => json!({
            "result": "SIMULATED",
            "relation": relation_size,
        }),
        SimulationResult::NotSimulated {
            refined_node,
            abstract_candidates,
            action,
            trace,
        } => json!({
            "result": "NOT_SIMULATED",
            "refinedNode": refined_node,
            "abstractCandidates": abstract_candidates,
            "action": action,
            "trace": trace,
        }),
    }
}

/// Graph nodes/edges for `--format=json`.
pub fn graph_json(lts: &Lts, sys: &SystemInstance) -> Json {
    let nodes: Vec<Json> = lts
        .labeling
        .iter()
        .enumerate()
        .map(|(i, labels)| {
            json!({
                "id": i,
                "props": labels
                    .iter()
                    .map(|&p| lts.prop_names[p as usize].clone())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Json> = lts
        .edges
        .iter()
        .map(|e| {
            json!({
                "src": e.src,
                "action": lts.action_name(e),
                "dst": e.dst,
            })
        })
        .collect();
    let _ = sys;
    json!({"nodes": nodes, "edges": edges, "init": 0})
}
