//! Simulation-preorder checking between an abstract system and its
//! refinement.
//!
//! A refined spec that shadows an abstract action name decomposes that
//! action: the step completing the spec body is observable as the abstract
//! action, earlier steps are internal. The checker computes the greatest
//! weak simulation by fixpoint refinement: every observable refined move
//! must be matched by an equally-labelled abstract move, internal moves are
//! matched by abstract stuttering. In strict mode (the default) matched
//! target states must also agree on the state variables shared with the
//! abstract system.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::SpecExpr;
use crate::explore::Lts;
use crate::sema::SystemDef;

/// Maps refined action names to the abstract actions they realize. Actions
/// not mentioned map to themselves; actions in `unmapped` exist only in the
/// refined system and cause simulation checking to fail fast.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionMap {
    pub map: BTreeMap<String, String>,
    pub unmapped: BTreeSet<String>,
}

impl ActionMap {
    pub fn identity() -> Self {
        ActionMap::default()
    }

    /// Abstract action realized by a refined action; `None` if unmapped.
    pub fn target<'a>(&'a self, action: &'a str) -> Option<&'a str> {
        if self.unmapped.contains(action) {
            return None;
        }
        Some(self.map.get(action).map(String::as_str).unwrap_or(action))
    }

    /// Compose `self` (refined -> mid) with `outer` (mid -> abstract).
    pub fn compose(&self, outer: &ActionMap) -> ActionMap {
        let mut map = BTreeMap::new();
        let mut unmapped = self.unmapped.clone();
        for (a, mid) in &self.map {
            match outer.target(mid) {
                Some(t) => {
                    if t != a {
                        map.insert(a.clone(), t.to_string());
                    }
                }
                None => {
                    unmapped.insert(a.clone());
                }
            }
        }
        for (mid, t) in &outer.map {
            if !self.map.contains_key(mid) && !map.contains_key(mid) {
                map.insert(mid.clone(), t.clone());
            }
        }
        for u in &outer.unmapped {
            if !self.map.contains_key(u) {
                unmapped.insert(u.clone());
            }
        }
        ActionMap { map, unmapped }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefineError {
    /// An action is decomposed by two different specs.
    AmbiguousMapping {
        action: String,
        spec_a: String,
        spec_b: String,
    },
    /// Simulation needs fully explored inputs.
    TruncatedInput,
    /// A refined transition fired an action with no abstract counterpart.
    UnmappedAction(String),
}

impl core::fmt::Display for RefineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RefineError::AmbiguousMapping {
                action,
                spec_a,
                spec_b,
            } => write!(
                f,
                "action `{}` is decomposed by both spec `{}` and spec `{}`",
                action, spec_a, spec_b
            ),
            RefineError::TruncatedInput => {
                write!(f, "simulation checking requires untruncated state spaces")
            }
            RefineError::UnmappedAction(a) => write!(
                f,
                "refined action `{}` has no abstract counterpart",
                a
            ),
        }
    }
}

/// Collect action names reachable in a spec expression, resolving through
/// spec references (specs win over same-named actions, as in elaboration).
fn reachable_actions(
    body: &SpecExpr,
    def: &SystemDef,
    visiting: &mut BTreeSet<String>,
    out: &mut BTreeSet<String>,
) {
    match body {
        SpecExpr::Atom(name, _) => {
            if let Some(spec) = def.spec(name) {
                if visiting.insert(name.clone()) {
                    reachable_actions(&spec.body, def, visiting, out);
                    visiting.remove(name);
                }
            } else if def.action(name).is_some() {
                out.insert(name.clone());
            }
        }
        SpecExpr::Seq(a, b, _) | SpecExpr::Choice(a, b, _) | SpecExpr::Par(a, b, _) => {
            reachable_actions(a, def, visiting, out);
            reachable_actions(b, def, visiting, out);
        }
        SpecExpr::Always(e, _) => reachable_actions(e, def, visiting, out),
        SpecExpr::FoldPar(_, _) => {}
    }
}

/// Derive the refined-to-abstract action map from decomposing specs: every
/// spec declared by the refined system whose name shadows an abstract action
/// maps its reachable actions to that action.
pub fn derive_action_map(
    abstract_def: &SystemDef,
    refined_def: &SystemDef,
) -> Result<ActionMap, RefineError> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for spec in refined_def.specs.iter().filter(|s| s.own) {
        if abstract_def.action(&spec.name).is_none() {
            continue;
        }
        let mut actions = BTreeSet::new();
        let mut visiting = BTreeSet::new();
        visiting.insert(spec.name.clone());
        reachable_actions(&spec.body, refined_def, &mut visiting, &mut actions);
        for action in actions {
            if action == spec.name {
                continue;
            }
            if let Some(previous) = map.get(&action) {
                if previous != &spec.name {
                    return Err(RefineError::AmbiguousMapping {
                        action,
                        spec_a: previous.clone(),
                        spec_b: spec.name.clone(),
                    });
                }
            }
            map.insert(action, spec.name.clone());
        }
    }
    let unmapped = refined_def
        .actions
        .iter()
        .filter(|a| !map.contains_key(&a.name) && abstract_def.action(&a.name).is_none())
        .map(|a| a.name.clone())
        .collect();
    Ok(ActionMap { map, unmapped })
}

/// Options for [`check_simulation`]. In strict mode matched states must
/// agree on the state variables both systems share.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub strict_state: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { strict_state: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulationResult {
    Simulated {
        relation_size: usize,
    },
    NotSimulated {
        refined_node: usize,
        /// Abstract states reachable by the offending observable action from
        /// the candidate match (empty if none exists at all).
        abstract_candidates: Vec<usize>,
        /// The observable (abstract) action that could not be matched.
        action: String,
        /// Refined action names from the initial node to the stuck node.
        trace: Vec<String>,
    },
}

/// Split a qualified action name into its instance prefix and local name
/// (`ps[0].PickFork` -> `("ps[0]", "PickFork")`; top-level names have an
/// empty prefix).
fn split_qualified(name: &str) -> (&str, &str) {
    match name.rfind('.') {
        Some(i) => (&name[..i], &name[i + 1..]),
        None => ("", name),
    }
}

pub fn check_simulation(
    abstract_lts: &Lts,
    refined_lts: &Lts,
    map: &ActionMap,
    opts: SimOptions,
) -> Result<SimulationResult, RefineError> {
    if abstract_lts.truncated.is_some() || refined_lts.truncated.is_some() {
        return Err(RefineError::TruncatedInput);
    }

    // Intern observable labels across both sides.
    let mut labels: BTreeMap<String, u32> = BTreeMap::new();
    let intern = |name: &str, labels: &mut BTreeMap<String, u32>| -> u32 {
        if let Some(&i) = labels.get(name) {
            return i;
        }
        let i = labels.len() as u32;
        labels.insert(name.to_string(), i);
        i
    };

    // Observable label per refined edge. The action map speaks in local
    // action names; the instance prefix is kept, so same-named actions of
    // different instances stay distinct. A decomposed action is observable
    // only on the step that completes its decomposing scope within the same
    // instance.
    let mut refined_obs: Vec<Option<u32>> = Vec::with_capacity(refined_lts.edges.len());
    for e in &refined_lts.edges {
        let name = refined_lts.action_name(e);
        let (prefix, local) = split_qualified(name);
        let Some(target) = map.target(local) else {
            return Err(RefineError::UnmappedAction(local.to_string()));
        };
        let obs = if target == local {
            Some(intern(name, &mut labels))
        } else {
            let completes_target = e.completes.iter().any(|&t| {
                let tag = &refined_lts.tag_names[t as usize];
                let (tag_prefix, tag_local) = split_qualified(tag);
                tag_prefix == prefix && tag_local == target
            });
            if completes_target {
                let qualified = if prefix.is_empty() {
                    target.to_string()
                } else {
                    alloc::format!("{}.{}", prefix, target)
                };
                Some(intern(&qualified, &mut labels))
            } else {
                None
            }
        };
        refined_obs.push(obs);
    }

    let abstract_labels: Vec<u32> = abstract_lts
        .edges
        .iter()
        .map(|e| intern(abstract_lts.action_name(e), &mut labels))
        .collect();

    let refined_out = refined_lts.outgoing();
    let abstract_out = abstract_lts.outgoing();

    // Shared state paths for strict matching. Each node's projection onto
    // the shared paths is interned once, so agreement checks are id compares.
    let shared: Vec<String> = if opts.strict_state {
        abstract_lts.nodes[0]
            .state
            .paths()
            .filter(|p| refined_lts.nodes[0].state.get(p).is_some())
            .cloned()
            .collect()
    } else {
        Vec::new()
    };
    let mut proj_ids: BTreeMap<Vec<&crate::value::Value>, u32> = BTreeMap::new();
    let mut refined_proj: Vec<u32> = Vec::with_capacity(refined_lts.nodes.len());
    let mut abstract_proj: Vec<u32> = Vec::with_capacity(abstract_lts.nodes.len());
    for (nodes, out) in [
        (&refined_lts.nodes, &mut refined_proj),
        (&abstract_lts.nodes, &mut abstract_proj),
    ] {
        for node in nodes.iter() {
            let proj: Vec<&crate::value::Value> =
                shared.iter().filter_map(|p| node.state.get(p)).collect();
            let next = proj_ids.len() as u32;
            out.push(*proj_ids.entry(proj).or_insert(next));
        }
    }
    let agree = |r: usize, a: usize| -> bool {
        !opts.strict_state || refined_proj[r] == abstract_proj[a]
    };

    // Sorted observable-label signature per node on each side.
    let signature = |edges: &[u32], obs: &dyn Fn(u32) -> Option<u32>| -> Vec<u32> {
        let mut sig: Vec<u32> = edges.iter().filter_map(|&e| obs(e)).collect();
        sig.sort_unstable();
        sig.dedup();
        sig
    };
    let refined_sigs: Vec<Vec<u32>> = refined_out
        .iter()
        .map(|edges| signature(edges, &|e| refined_obs[e as usize]))
        .collect();
    let abstract_sigs: Vec<Vec<u32>> = abstract_out
        .iter()
        .map(|edges| signature(edges, &|e| Some(abstract_labels[e as usize])))
        .collect();

    fn subset(a: &[u32], b: &[u32]) -> bool {
        let mut it = b.iter();
        'outer: for x in a {
            for y in it.by_ref() {
                match y.cmp(x) {
                    core::cmp::Ordering::Equal => continue 'outer,
                    core::cmp::Ordering::Greater => return false,
                    core::cmp::Ordering::Less => {}
                }
            }
            return false;
        }
        true
    }

    // Candidate relation seeded by signature subsumption, computed over
    // distinct signatures to avoid the full node product.
    let mut abstract_by_sig: BTreeMap<&[u32], Vec<u32>> = BTreeMap::new();
    for (n, sig) in abstract_sigs.iter().enumerate() {
        abstract_by_sig.entry(sig.as_slice()).or_default().push(n as u32);
    }
    let mut candidates_by_sig: BTreeMap<&[u32], Vec<u32>> = BTreeMap::new();
    for sig in refined_sigs.iter() {
        if candidates_by_sig.contains_key(sig.as_slice()) {
            continue;
        }
        let mut nodes: Vec<u32> = Vec::new();
        for (asig, anodes) in &abstract_by_sig {
            if subset(sig.as_slice(), asig) {
                nodes.extend_from_slice(anodes);
            }
        }
        nodes.sort_unstable();
        candidates_by_sig.insert(sig.as_slice(), nodes);
    }

    let mut relation: Vec<BTreeSet<u32>> = refined_sigs
        .iter()
        .map(|sig| {
            candidates_by_sig[sig.as_slice()]
                .iter()
                .copied()
                .collect::<BTreeSet<u32>>()
        })
        .collect();

    // Greatest-fixpoint refinement; removal sweep number is the pair's rank.
    let mut rank: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut sweep = 0u32;
    loop {
        sweep += 1;
        let mut removals: Vec<(u32, u32)> = Vec::new();
        for (s, candidates) in relation.iter().enumerate() {
            'pair: for &t in candidates {
                for &e in &refined_out[s] {
                    let edge = &refined_lts.edges[e as usize];
                    match refined_obs[e as usize] {
                        None => {
                            if !relation[edge.dst as usize].contains(&t) {
                                removals.push((s as u32, t));
                                continue 'pair;
                            }
                        }
                        Some(lbl) => {
                            let mut matched = false;
                            for &f in &abstract_out[t as usize] {
                                if abstract_labels[f as usize] != lbl {
                                    continue;
                                }
                                let tdst = abstract_lts.edges[f as usize].dst;
                                if relation[edge.dst as usize].contains(&tdst)
                                    && agree(edge.dst as usize, tdst as usize)
                                {
                                    matched = true;
                                    break;
                                }
                            }
                            if !matched {
                                removals.push((s as u32, t));
                                continue 'pair;
                            }
                        }
                    }
                }
            }
        }
        if removals.is_empty() {
            break;
        }
        for &(s, t) in &removals {
            relation[s as usize].remove(&t);
            rank.insert((s, t), sweep);
        }
    }

    let init_in = relation[0].contains(&0);
    if init_in && agree(0, 0) {
        let relation_size: usize = relation.iter().map(|r| r.len()).sum();
        return Ok(SimulationResult::Simulated { relation_size });
    }

    if !agree(0, 0) {
        return Ok(SimulationResult::NotSimulated {
            refined_node: 0,
            abstract_candidates: alloc::vec![0],
            action: "<initial state>".to_string(),
            trace: Vec::new(),
        });
    }

    // Witness walk: at a dead pair, follow the move every response to which
    // is dead with a smaller rank, until a move has no response at all.
    let pair_rank = |s: u32, t: u32, rank: &BTreeMap<(u32, u32), u32>| -> u32 {
        // pairs never seeded have rank 0; surviving pairs are effectively infinite
        if relation[s as usize].contains(&t) {
            u32::MAX
        } else {
            rank.get(&(s, t)).copied().unwrap_or(0)
        }
    };

    let mut s = 0u32;
    let mut t = 0u32;
    let mut trace: Vec<String> = Vec::new();
    loop {
        let r = pair_rank(s, t, &rank);
        debug_assert!(r != u32::MAX, "witness walk entered a live pair");
        let mut next: Option<(u32, u32, String)> = None;
        let mut terminal: Option<(Vec<usize>, String)> = None;
        for &e in &refined_out[s as usize] {
            let edge = &refined_lts.edges[e as usize];
            let action_name = refined_lts.action_name(edge).to_string();
            match refined_obs[e as usize] {
                None => {
                    if pair_rank(edge.dst, t, &rank) < r {
                        next = Some((edge.dst, t, action_name));
                        break;
                    }
                }
                Some(lbl) => {
                    let mut responses: Vec<u32> = Vec::new();
                    for &f in &abstract_out[t as usize] {
                        if abstract_labels[f as usize] == lbl {
                            responses.push(abstract_lts.edges[f as usize].dst);
                        }
                    }
                    let valid: Vec<u32> = responses
                        .iter()
                        .copied()
                        .filter(|&tdst| agree(edge.dst as usize, tdst as usize))
                        .collect();
                    let obs_name = labels
                        .iter()
                        .find(|(_, &i)| i == lbl)
                        .map(|(n, _)| n.clone())
                        .unwrap_or(action_name.clone());
                    if valid.is_empty() {
                        terminal = Some((
                            responses.iter().map(|&x| x as usize).collect(),
                            obs_name,
                        ));
                        trace.push(refined_lts.action_name(edge).to_string());
                        break;
                    }
                    if valid.iter().all(|&tdst| pair_rank(edge.dst, tdst, &rank) < r) {
                        let follow = valid
                            .iter()
                            .copied()
                            .max_by_key(|&tdst| pair_rank(edge.dst, tdst, &rank))
                            .expect("nonempty");
                        next = Some((edge.dst, follow, action_name));
                        break;
                    }
                }
            }
        }
        if let Some((candidates, action)) = terminal {
            return Ok(SimulationResult::NotSimulated {
                refined_node: s as usize,
                abstract_candidates: candidates,
                action,
                trace,
            });
        }
        match next {
            Some((ns, nt, action)) => {
                trace.push(action);
                s = ns;
                t = nt;
            }
            None => {
                // The pair died of a move whose responses all fail agreement
                // or rank; report the first observable move as offending.
                for &e in &refined_out[s as usize] {
                    let edge = &refined_lts.edges[e as usize];
                    if let Some(lbl) = refined_obs[e as usize] {
                        let responses: Vec<usize> = abstract_out[t as usize]
                            .iter()
                            .filter(|&&f| abstract_labels[f as usize] == lbl)
                            .map(|&f| abstract_lts.edges[f as usize].dst as usize)
                            .collect();
                        let obs_name = labels
                            .iter()
                            .find(|(_, &i)| i == lbl)
                            .map(|(n, _)| n.clone())
                            .unwrap_or_default();
                        trace.push(refined_lts.action_name(edge).to_string());
                        return Ok(SimulationResult::NotSimulated {
                            refined_node: s as usize,
                            abstract_candidates: responses,
                            action: obs_name,
                            trace,
                        });
                    }
                }
                return Ok(SimulationResult::NotSimulated {
                    refined_node: s as usize,
                    abstract_candidates: Vec::new(),
                    action: "<stuck>".to_string(),
                    trace,
                });
            }
        }
    }
}
