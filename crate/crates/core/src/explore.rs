//! Reachable-state exploration: small-step semantics, BFS state-space
//! construction with dedup, labeling, and graph export.
//!
//! A [`Configuration`] is a process continuation plus a state vector; two
//! configurations are equal iff both parts are equal, and that equality is
//! the dedup key. Exploration is breadth-first with components expanded in
//! declaration order and choice branches left to right, so node indices,
//! edge order, and traces are reproducible.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::elab::{apply_action, eval_prop, ProcessExpr, StateVector, SystemInstance};
use crate::eval::EvalFault;
use crate::rng::SplitMix64;

/// A global state of the explored system: control plus data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub control: ProcessExpr,
    pub state: StateVector,
}

/// One enabled small step.
#[derive(Debug, Clone)]
pub struct EnabledStep {
    /// Index into [`SystemInstance::actions`].
    pub action: u32,
    /// Decomposition scopes this step completes (innermost first).
    pub completes: Vec<u16>,
    pub next: Configuration,
}

/// One transition of the LTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: u32,
    /// Index into [`Lts::action_names`].
    pub action: u32,
    /// Indices into [`Lts::tag_names`] of completed decomposition scopes.
    pub completes: Vec<u16>,
    pub dst: u32,
}

/// The explored labelled transition system.
#[derive(Debug, Clone)]
pub struct Lts {
    pub nodes: Vec<Configuration>,
    pub edges: Vec<Edge>,
    /// Qualified action names, indexed by `Edge::action`.
    pub action_names: Vec<String>,
    /// Names of decomposing specs, indexed by `Edge::completes` entries.
    pub tag_names: Vec<String>,
    pub prop_names: Vec<String>,
    /// Per node, ascending indices of the props whose predicate holds there.
    pub labeling: Vec<Vec<u16>>,
    /// BFS tree: the edge that discovered each node (`None` for the root).
    pub parent: Vec<Option<u32>>,
    /// Nodes whose successors were all materialized. Always all-true when
    /// the exploration was not truncated.
    pub expanded: Vec<bool>,
    /// Bound that cut exploration short, if any.
    pub truncated: Option<usize>,
    /// Number of distinct state vectors among nodes (configurations may
    /// share a state vector while differing in control).
    pub distinct_states: usize,
}

impl Lts {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn action_name(&self, edge: &Edge) -> &str {
        &self.action_names[edge.action as usize]
    }

    pub fn prop_index(&self, name: &str) -> Option<u16> {
        self.prop_names
            .iter()
            .position(|p| p == name)
            .map(|i| i as u16)
    }

    pub fn has_prop(&self, node: usize, prop: u16) -> bool {
        self.labeling[node].binary_search(&prop).is_ok()
    }

    /// Outgoing edge indices per node.
    pub fn outgoing(&self) -> Vec<Vec<u32>> {
        let mut out = alloc::vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.src as usize].push(i as u32);
        }
        out
    }

    /// BFS-tree path from the initial node to `node`.
    pub fn trace_to(&self, node: usize) -> Trace {
        let mut steps = Vec::new();
        let mut cur = node;
        while let Some(edge_idx) = self.parent[cur] {
            steps.push(edge_idx);
            cur = self.edges[edge_idx as usize].src as usize;
        }
        steps.reverse();
        Trace { steps }
    }
}

/// Alternating node/action path starting at the initial node, stored as edge
/// indices into an [`Lts`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<u32>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(action name, target node)` per step.
    pub fn steps_in<'a>(&'a self, lts: &'a Lts) -> impl Iterator<Item = (&'a str, usize)> + 'a {
        self.steps.iter().map(|&e| {
            let edge = &lts.edges[e as usize];
            (lts.action_name(edge), edge.dst as usize)
        })
    }
}

#[derive(Debug, Clone)]
pub enum ExploreError {
    /// An action or prop faulted; the trace holds the qualified action names
    /// leading to the faulting configuration.
    EvalFault {
        context: String,
        fault: EvalFault,
        trace: Vec<String>,
    },
}

impl core::fmt::Display for ExploreError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExploreError::EvalFault {
                context,
                fault,
                trace,
            } => {
                write!(f, "evaluation fault in {}: {}", context, fault)?;
                if !trace.is_empty() {
                    write!(f, " (after ")?;
                    for (i, a) in trace.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Small-step derivatives of a process: `(action, continuation, completed scopes)`.
fn process_steps(p: &ProcessExpr) -> Vec<(u32, ProcessExpr, Vec<u16>)> {
    match p {
        ProcessExpr::Done => Vec::new(),
        ProcessExpr::Act(a) => alloc::vec![(*a, ProcessExpr::Done, Vec::new())],
        ProcessExpr::Seq(first, rest) => process_steps(first)
            .into_iter()
            .map(|(a, cont, tags)| {
                let next = match cont {
                    ProcessExpr::Done => (**rest).clone(),
                    other => ProcessExpr::Seq(Rc::new(other), rest.clone()),
                };
                (a, next, tags)
            })
            .collect(),
        ProcessExpr::Choice(left, right) => {
            let mut steps = process_steps(left);
            steps.extend(process_steps(right));
            steps
        }
        ProcessExpr::Always(body) => process_steps(body)
            .into_iter()
            .map(|(a, cont, tags)| {
                let again = ProcessExpr::Always(body.clone());
                let next = match cont {
                    ProcessExpr::Done => again,
                    other => ProcessExpr::Seq(Rc::new(other), Rc::new(again)),
                };
                (a, next, tags)
            })
            .collect(),
        ProcessExpr::Par(components) => {
            let mut steps = Vec::new();
            for (i, component) in components.iter().enumerate() {
                for (a, cont, tags) in process_steps(component) {
                    let mut rest: Vec<Rc<ProcessExpr>> = Vec::with_capacity(components.len());
                    for (j, c) in components.iter().enumerate() {
                        if j == i {
                            if cont != ProcessExpr::Done {
                                rest.push(Rc::new(cont.clone()));
                            }
                        } else {
                            rest.push(c.clone());
                        }
                    }
                    let next = match rest.len() {
                        0 => ProcessExpr::Done,
                        1 => (*rest[0]).clone(),
                        _ => ProcessExpr::Par(rest),
                    };
                    steps.push((a, next, tags));
                }
            }
            steps
        }
        ProcessExpr::Scope(tag, body) => process_steps(body)
            .into_iter()
            .map(|(a, cont, mut tags)| match cont {
                ProcessExpr::Done => {
                    tags.push(*tag);
                    (a, ProcessExpr::Done, tags)
                }
                other => (a, ProcessExpr::Scope(*tag, Rc::new(other)), tags),
            })
            .collect(),
    }
}

/// All enabled steps of a configuration, in deterministic order: components
/// in declaration order, choice branches left to right.
pub fn enabled_steps(
    config: &Configuration,
    sys: &SystemInstance,
) -> Result<Vec<EnabledStep>, ExploreError> {
    enabled_steps_traced(config, sys, &[])
}

fn enabled_steps_traced(
    config: &Configuration,
    sys: &SystemInstance,
    trace: &[String],
) -> Result<Vec<EnabledStep>, ExploreError> {
    let mut out = Vec::new();
    for (action_idx, control, completes) in process_steps(&config.control) {
        let action = &sys.actions[action_idx as usize];
        let state =
            apply_action(&config.state, action, &sys.funcs).map_err(|fault| {
                ExploreError::EvalFault {
                    context: format!("action {}", action.qualified_name),
                    fault,
                    trace: trace.to_vec(),
                }
            })?;
        out.push(EnabledStep {
            action: action_idx,
            completes,
            next: Configuration { control, state },
        });
    }
    Ok(out)
}

fn label_node(
    sys: &SystemInstance,
    state: &StateVector,
    trace: &[String],
) -> Result<Vec<u16>, ExploreError> {
    let mut labels = Vec::new();
    for (i, prop) in sys.props.iter().enumerate() {
        let holds = eval_prop(prop, state, &sys.funcs).map_err(|fault| {
            ExploreError::EvalFault {
                context: format!("prop {}", prop.name),
                fault,
                trace: trace.to_vec(),
            }
        })?;
        if holds {
            labels.push(i as u16);
        }
    }
    Ok(labels)
}

/// Build the reachable LTS from the instance's `Main` process.
pub fn build_lts(sys: &SystemInstance, max_states: usize) -> Result<Lts, ExploreError> {
    build_lts_of(sys, sys.main.clone(), max_states)
}

/// Build the reachable LTS from a given root process (used for properties
/// over non-Main specs).
pub fn build_lts_of(
    sys: &SystemInstance,
    root: ProcessExpr,
    max_states: usize,
) -> Result<Lts, ExploreError> {
    let initial = Configuration {
        control: root,
        state: sys.initial.clone(),
    };

    let mut nodes: Vec<Configuration> = Vec::new();
    let mut index: BTreeMap<Configuration, u32> = BTreeMap::new();
    let mut labeling: Vec<Vec<u16>> = Vec::new();
    let mut parent: Vec<Option<u32>> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut expanded: Vec<bool> = Vec::new();
    let mut state_set: BTreeSet<StateVector> = BTreeSet::new();
    let mut truncated = None;

    labeling.push(label_node(sys, &initial.state, &[])?);
    state_set.insert(initial.state.clone());
    index.insert(initial.clone(), 0);
    nodes.push(initial);
    parent.push(None);
    expanded.push(true);

    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(0);

    'bfs: while let Some(u) = queue.pop_front() {
        let config = nodes[u as usize].clone();
        let trace: Vec<String> = {
            // parent chain, root first; only materialized on demand for errors
            let mut names = Vec::new();
            let mut cur = u as usize;
            while let Some(e) = parent[cur] {
                let edge = &edges[e as usize];
                names.push(sys.actions[edge.action as usize].qualified_name.clone());
                cur = edge.src as usize;
            }
            names.reverse();
            names
        };
        let steps = enabled_steps_traced(&config, sys, &trace)?;
        for step in steps {
            let dst = match index.get(&step.next) {
                Some(&i) => i,
                None => {
                    if nodes.len() >= max_states {
                        truncated = Some(max_states);
                        expanded[u as usize] = false;
                        // leave the rest of the frontier unexpanded
                        for v in queue.iter() {
                            expanded[*v as usize] = false;
                        }
                        break 'bfs;
                    }
                    let i = nodes.len() as u32;
                    let mut t = trace.clone();
                    t.push(sys.actions[step.action as usize].qualified_name.clone());
                    labeling.push(label_node(sys, &step.next.state, &t)?);
                    state_set.insert(step.next.state.clone());
                    index.insert(step.next.clone(), i);
                    nodes.push(step.next.clone());
                    parent.push(Some(edges.len() as u32));
                    expanded.push(true);
                    queue.push_back(i);
                    i
                }
            };
            edges.push(Edge {
                src: u,
                action: step.action,
                completes: step.completes,
                dst,
            });
        }
    }

    Ok(Lts {
        distinct_states: state_set.len(),
        action_names: sys
            .actions
            .iter()
            .map(|a| a.qualified_name.clone())
            .collect(),
        tag_names: sys.tags.clone(),
        prop_names: sys.props.iter().map(|p| p.name.clone()).collect(),
        nodes,
        edges,
        labeling,
        parent,
        expanded,
        truncated,
    })
}

/// Render the LTS as a DOT digraph. Node labels carry the index and the true
/// propositions; the initial node is double-circled; edges carry qualified
/// action names. Byte-deterministic for equal inputs.
pub fn export_dot(lts: &Lts) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "digraph lts {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=circle];");
    for (i, labels) in lts.labeling.iter().enumerate() {
        let mut label = format!("{}", i);
        for &p in labels {
            label.push_str("\\n");
            label.push_str(&lts.prop_names[p as usize]);
        }
        let shape = if i == 0 { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  n{} [label=\"{}\"{}];", i, label, shape);
    }
    for e in &lts.edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.src,
            e.dst,
            lts.action_name(e)
        );
    }
    let _ = writeln!(out, "}}");
    if let Some(bound) = lts.truncated {
        let _ = writeln!(out, "// truncated at {}", bound);
    }
    out
}

/// Line-oriented text form: `node <idx> <prop,prop,...>`, `edge <src>
/// <action> <dst>`, `init 0`. Stable and diff-friendly.
pub fn export_lines(lts: &Lts) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, labels) in lts.labeling.iter().enumerate() {
        let props = if labels.is_empty() {
            "-".to_string()
        } else {
            let names: Vec<&str> = labels
                .iter()
                .map(|&p| lts.prop_names[p as usize].as_str())
                .collect();
            names.join(",")
        };
        let _ = writeln!(out, "node {} {}", i, props);
    }
    for e in &lts.edges {
        let _ = writeln!(out, "edge {} {} {}", e.src, lts.action_name(e), e.dst);
    }
    let _ = writeln!(out, "init 0");
    out
}

/// One step of a seeded random walk.
#[derive(Debug, Clone)]
pub struct WalkStep {
    pub action: String,
    pub state: StateVector,
}

/// Seeded pseudo-random walk over enabled steps; identical seed and program
/// give an identical walk. Stops early at a configuration with no steps.
pub fn random_walk(
    sys: &SystemInstance,
    steps: usize,
    seed: u64,
) -> Result<Vec<WalkStep>, ExploreError> {
    let mut rng = SplitMix64::new(seed);
    let mut config = Configuration {
        control: sys.main.clone(),
        state: sys.initial.clone(),
    };
    let mut out = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for _ in 0..steps {
        let enabled = enabled_steps_traced(&config, sys, &names)?;
        if enabled.is_empty() {
            break;
        }
        let pick = rng.next_below(enabled.len());
        let step = enabled.into_iter().nth(pick).expect("pick < len");
        let name = sys.actions[step.action as usize].qualified_name.clone();
        names.push(name.clone());
        out.push(WalkStep {
            action: name,
            state: step.next.state.clone(),
        });
        config = step.next;
    }
    Ok(out)
}
