//! Elaboration and state-space exploration over the corpus.

mod common;

use common::*;
use seni_core::elab::{apply_action, elaborate, ElabError, ProcessExpr};
use seni_core::explore::{build_lts, enabled_steps, export_dot, random_walk, Configuration};
use seni_core::value::Value;

fn int(n: i64) -> Value {
    Value::Int(n)
}

fn record(fields: &[(&str, Value)]) -> Value {
    Value::Record(
        fields
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
    )
}

#[test]
fn abstract_philosopher_initial_state() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    assert_eq!(sys.initial.get("id"), Some(&int(0)));
    assert_eq!(sys.initial.get("isThinking"), Some(&Value::Bool(true)));
    assert_eq!(
        sys.initial.get("h"),
        Some(&record(&[("leftHand", Value::Null), ("rightHand", Value::Null)]))
    );
    // Main = always (PickFork . ReturnFork)
    match &sys.main {
        ProcessExpr::Always(body) => match &**body {
            ProcessExpr::Seq(first, second) => {
                assert!(matches!(**first, ProcessExpr::Act(_)));
                assert!(matches!(**second, ProcessExpr::Act(_)));
            }
            other => panic!("expected sequence, got {other:?}"),
        },
        other => panic!("expected always, got {other:?}"),
    }
}

#[test]
fn pick_fork_applies_corpus_convention() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let (_, pick) = sys.action("PickFork").unwrap();
    let post = apply_action(&sys.initial, pick, &sys.funcs).unwrap();
    assert_eq!(post.get("id"), Some(&int(0)));
    assert_eq!(post.get("isThinking"), Some(&Value::Bool(false)));
    assert_eq!(
        post.get("h"),
        Some(&record(&[("leftHand", int(0)), ("rightHand", int(1))]))
    );
    // pre-state untouched
    assert_eq!(sys.initial.get("isThinking"), Some(&Value::Bool(true)));

    let (_, ret) = sys.action("ReturnFork").unwrap();
    let back = apply_action(&post, ret, &sys.funcs).unwrap();
    assert_eq!(back, sys.initial);
}

#[test]
fn seat_two_wraps_around() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["2"]);
    let (_, pick) = sys.action("PickFork").unwrap();
    let post = apply_action(&sys.initial, pick, &sys.funcs).unwrap();
    assert_eq!(
        post.get("h"),
        Some(&record(&[("leftHand", int(2)), ("rightHand", int(0))]))
    );
}

#[test]
fn empty_action_is_identity() {
    let src = "system P { state int x: 5; action Nop { } spec Main { always Nop } }";
    let sys = instance_single(src, "P", &[]);
    let (_, nop) = sys.action("Nop").unwrap();
    let post = apply_action(&sys.initial, nop, &sys.funcs).unwrap();
    assert_eq!(post, sys.initial);
}

#[test]
fn assignments_apply_atomically() {
    let src = r#"system P {
    state int a: 1;
    state int b: 2;
    action Swap { @.a: b; @.b: a; }
    spec Main { always Swap }
}"#;
    let sys = instance_single(src, "P", &[]);
    let (_, swap) = sys.action("Swap").unwrap();
    let post = apply_action(&sys.initial, swap, &sys.funcs).unwrap();
    assert_eq!(post.get("a"), Some(&int(2)));
    assert_eq!(post.get("b"), Some(&int(1)));
}

#[test]
fn elaboration_is_deterministic() {
    let a = instance("Table", &corpus_modules(), &[]);
    let b = instance("Table", &corpus_modules(), &[]);
    assert_eq!(a.initial, b.initial);
    assert_eq!(a.main, b.main);
    assert_eq!(
        a.actions.iter().map(|x| &x.qualified_name).collect::<Vec<_>>(),
        b.actions.iter().map(|x| &x.qualified_name).collect::<Vec<_>>()
    );
}

#[test]
fn qualified_paths_are_disjoint_per_instance() {
    let sys = instance("Table", &corpus_modules(), &[]);
    // 3 philosophers x 3 vars + 3 forks x 3 vars
    assert_eq!(sys.initial.len(), 18);
    for i in 0..3 {
        assert_eq!(
            sys.initial.get(&format!("philosophers[{i}].id")),
            Some(&int(i))
        );
        assert_eq!(sys.initial.get(&format!("forks[{i}].id")), Some(&int(i)));
        assert_eq!(sys.initial.get(&format!("forks[{i}].holder")), Some(&Value::Null));
    }
}

#[test]
fn table_main_is_six_way_interleaving() {
    let sys = instance("Table", &corpus_modules(), &[]);
    match &sys.main {
        ProcessExpr::Par(components) => assert_eq!(components.len(), 6),
        other => panic!("expected 6-way parallel, got {other:?}"),
    }
}

#[test]
fn mainless_entry_is_rejected() {
    let modules = [("NoMain", "system NoMain { state int x; }")];
    let program = check("NoMain", &modules).unwrap();
    let err = elaborate(&program.systems, "NoMain", &[]).unwrap_err();
    assert!(matches!(err, ElabError::NoMainSpec(name) if name == "NoMain"));
}

#[test]
fn recursive_spec_is_rejected() {
    let src = r#"system P {
    state int x;
    action A { @.x: 1; }
    spec Main { A.Main }
}"#;
    let program = check_single(src).unwrap();
    let err = elaborate(&program.systems, "P", &[]).unwrap_err();
    assert!(matches!(err, ElabError::UnboundedRecursion { .. }));
}

#[test]
fn single_action_main_terminates() {
    let src = "system P { state int x; action A { @.x: 1; } spec Main { A } }";
    let sys = instance_single(src, "P", &[]);
    assert!(matches!(sys.main, ProcessExpr::Act(_)));
    let lts = build_lts(&sys, 1_000_000).unwrap();
    assert_eq!(lts.nodes.len(), 2);
    assert_eq!(lts.edges.len(), 1);
}

#[test]
fn abstract_philosopher_has_one_initial_step() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let config = Configuration {
        control: sys.main.clone(),
        state: sys.initial.clone(),
    };
    let steps = enabled_steps(&config, &sys).unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(
        sys.actions[steps[0].action as usize].qualified_name,
        "PickFork"
    );
}

#[test]
fn refined_philosopher_has_two_initial_steps() {
    let sys = instance("Philosopher", &corpus_modules(), &["0"]);
    let config = Configuration {
        control: sys.main.clone(),
        state: sys.initial.clone(),
    };
    let steps = enabled_steps(&config, &sys).unwrap();
    let names: Vec<&str> = steps
        .iter()
        .map(|s| sys.actions[s.action as usize].qualified_name.as_str())
        .collect();
    assert_eq!(names, ["PickLeft", "PickRight"]);
}

#[test]
fn done_configuration_has_no_steps() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let config = Configuration {
        control: ProcessExpr::Done,
        state: sys.initial.clone(),
    };
    assert!(enabled_steps(&config, &sys).unwrap().is_empty());
}

// State counts frozen from the hand enumerator in the acceptance suite:
// the primary philosopher cycles between exactly 2 configurations, the
// refined one visits 6.

#[test]
fn abstract_philosopher_lts_is_two_node_cycle() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let lts = build_lts(&sys, 1_000_000).unwrap();
    assert_eq!(lts.nodes.len(), 2);
    assert_eq!(lts.edges.len(), 2);
    assert_eq!(lts.truncated, None);
    assert_eq!(lts.distinct_states, 2);
}

#[test]
fn refined_philosopher_lts_has_six_nodes() {
    let sys = instance("Philosopher", &corpus_modules(), &["0"]);
    let lts = build_lts(&sys, 1_000_000).unwrap();
    assert_eq!(lts.nodes.len(), 6);
    assert_eq!(lts.edges.len(), 8);
    assert_eq!(lts.truncated, None);
    // intermediate states are labeled Waiting on one side
    let wl = lts.prop_index("WaitingLeft").unwrap();
    let wr = lts.prop_index("WaitingRight").unwrap();
    let one_fork_nodes = (0..lts.nodes.len())
        .filter(|&n| lts.has_prop(n, wl) || lts.has_prop(n, wr))
        .count();
    assert_eq!(one_fork_nodes, 4);
}

#[test]
fn bound_of_one_truncates() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let lts = build_lts(&sys, 1).unwrap();
    assert_eq!(lts.nodes.len(), 1);
    assert_eq!(lts.truncated, Some(1));
    assert!(!lts.expanded[0]);
}

#[test]
fn untruncated_bound_is_monotone() {
    let sys = instance("Philosopher", &corpus_modules(), &["0"]);
    let small = build_lts(&sys, 6).unwrap();
    assert_eq!(small.truncated, None);
    let big = build_lts(&sys, 1_000_000).unwrap();
    assert_eq!(small.nodes, big.nodes);
    assert_eq!(small.edges, big.edges);
    assert_eq!(small.labeling, big.labeling);
}

#[test]
fn table_initial_steps_are_disjoint_union_of_components() {
    let sys = instance("Table", &corpus_modules(), &[]);
    let config = Configuration {
        control: sys.main.clone(),
        state: sys.initial.clone(),
    };
    let steps = enabled_steps(&config, &sys).unwrap();
    // 2 per refined philosopher + 2 per fork
    assert_eq!(steps.len(), 12);
    // per-component sums match
    let ProcessExpr::Par(components) = &sys.main else {
        panic!("table main must be parallel");
    };
    let mut sum = 0;
    for c in components {
        let cfg = Configuration {
            control: (**c).clone(),
            state: sys.initial.clone(),
        };
        sum += enabled_steps(&cfg, &sys).unwrap().len();
    }
    assert_eq!(steps.len(), sum);
}

#[test]
fn table_state_space_size_is_product_of_components() {
    let sys = instance("Table", &corpus_modules(), &[]);
    let lts = build_lts(&sys, 100_000).unwrap();
    // free interleaving: 6 configurations per philosopher, 3 per fork
    assert_eq!(lts.nodes.len(), 6 * 6 * 6 * 3 * 3 * 3);
    assert_eq!(lts.truncated, None);
}

#[test]
fn dot_export_shape() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let lts = build_lts(&sys, 1_000_000).unwrap();
    let dot = export_dot(&lts);
    assert!(dot.starts_with("digraph lts {"));
    assert!(dot.contains("n0 [label=\"0\", shape=doublecircle];"));
    assert!(dot.contains("n1 [label=\"1\"];"));
    assert!(dot.contains("n0 -> n1 [label=\"PickFork\"];"));
    assert!(dot.contains("n1 -> n0 [label=\"ReturnFork\"];"));
    assert!(!dot.contains("truncated"));

    let truncated = build_lts(&sys, 1).unwrap();
    assert!(export_dot(&truncated).ends_with("// truncated at 1\n"));
}

#[test]
fn dot_export_is_deterministic() {
    let sys = instance("Table", &corpus_modules(), &[]);
    let a = export_dot(&build_lts(&sys, 2_000).unwrap());
    let b = export_dot(&build_lts(&sys, 2_000).unwrap());
    assert_eq!(a, b);
}

#[test]
fn refined_dot_carries_waiting_labels() {
    let sys = instance("Philosopher", &corpus_modules(), &["0"]);
    let dot = export_dot(&build_lts(&sys, 100).unwrap());
    assert!(dot.contains("WaitingRight"));
    assert!(dot.contains("WaitingLeft"));
}

#[test]
fn division_fault_carries_partial_trace() {
    let src = r#"system P {
    state int x: 2;
    action Dec { @.x: x - 1; }
    action Boom { @.x: 10 / (x - 1); }
    spec Main { always (Dec.Boom) }
}"#;
    let sys = instance_single(src, "P", &[]);
    let err = build_lts(&sys, 1_000).unwrap_err();
    let seni_core::explore::ExploreError::EvalFault { context, fault, trace } = err;
    assert!(context.contains("Boom"), "{context}");
    assert!(matches!(fault, seni_core::eval::EvalFault::DivisionByZero));
    assert_eq!(trace, vec!["Dec".to_string()]);
}

#[test]
fn walk_follows_the_only_cycle() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    let walk = random_walk(&sys, 4, 0).unwrap();
    let names: Vec<&str> = walk.iter().map(|s| s.action.as_str()).collect();
    assert_eq!(names, ["PickFork", "ReturnFork", "PickFork", "ReturnFork"]);
}

#[test]
fn walk_is_seed_deterministic_and_edge_sound() {
    let sys = instance("Table", &corpus_modules(), &[]);
    let a = random_walk(&sys, 25, 7).unwrap();
    let b = random_walk(&sys, 25, 7).unwrap();
    assert_eq!(a.len(), 25);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.action, y.action);
        assert_eq!(x.state, y.state);
    }
    // every walked transition exists in the LTS
    let lts = build_lts(&sys, 100_000).unwrap();
    let mut node = 0usize;
    for step in &a {
        let out: Vec<_> = lts
            .edges
            .iter()
            .filter(|e| e.src as usize == node && lts.action_name(e) == step.action)
            .collect();
        let found = out.iter().find(|e| lts.nodes[e.dst as usize].state == step.state);
        let edge = found.unwrap_or_else(|| panic!("transition {} missing", step.action));
        node = edge.dst as usize;
    }
}

#[test]
fn zero_step_walk_is_empty() {
    let sys = instance("PhilosopherAbstract", &corpus_modules(), &["0"]);
    assert!(random_walk(&sys, 0, 0).unwrap().is_empty());
}

#[test]
fn dfs_reaches_the_same_configuration_set() {
    // dedup confluence: a DFS in test code reaches the same set of
    // configurations the BFS explorer does
    let sys = instance("Philosopher", &corpus_modules(), &["0"]);
    let lts = build_lts(&sys, 10_000).unwrap();

    let mut seen: std::collections::BTreeSet<Configuration> = Default::default();
    let initial = Configuration {
        control: sys.main.clone(),
        state: sys.initial.clone(),
    };
    let mut stack = vec![initial];
    while let Some(cfg) = stack.pop() {
        if !seen.insert(cfg.clone()) {
            continue;
        }
        for step in enabled_steps(&cfg, &sys).unwrap() {
            stack.push(step.next);
        }
    }
    let bfs_set: std::collections::BTreeSet<Configuration> =
        lts.nodes.iter().cloned().collect();
    assert_eq!(seen, bfs_set);
}

#[test]
fn replicate_zero_gives_empty_composition() {
    let modules = [
        ("Phil", "system Phil { state int id; action T { @.id: id; } init([string] a) { @.id: (int) a[0]; } spec Main { always T } }"),
        ("Top", "import Phil;\nsystem Top { [Phil] ps; init([string] a) { ps: replicate(0, p::Phil); } spec Main { fold(||, ps) } }"),
    ];
    let program = check("Top", &modules).unwrap();
    let sys = elaborate(&program.systems, "Top", &[]).unwrap();
    assert_eq!(sys.main, ProcessExpr::Done);
    let lts = build_lts(&sys, 10).unwrap();
    assert_eq!(lts.nodes.len(), 1);
    assert_eq!(lts.edges.len(), 0);
    assert_eq!(lts.truncated, None);
}

#[test]
fn replicate_instances_get_index_args() {
    let modules = [
        ("Phil", "system Phil { state int id; action T { @.id: id; } init([string] a) { @.id: (int) a[0]; } spec Main { always T } }"),
        ("Top", "import Phil;\nsystem Top { [Phil] ps; init([string] a) { ps: replicate(3, p::Phil); } spec Main { fold(||, ps) } }"),
    ];
    let program = check("Top", &modules).unwrap();
    let sys = elaborate(&program.systems, "Top", &[]).unwrap();
    for i in 0..3 {
        assert_eq!(
            sys.initial.get(&format!("ps[{i}].id")),
            Some(&Value::Int(i))
        );
    }
    let one = {
        let modules = [
            ("Phil", "system Phil { state int id; action T { @.id: id; } init([string] a) { @.id: (int) a[0]; } spec Main { always T } }"),
            ("Top", "import Phil;\nsystem Top { [Phil] ps; init([string] a) { ps: replicate(1, p::Phil); } spec Main { fold(||, ps) } }"),
        ];
        let program = check("Top", &modules).unwrap();
        elaborate(&program.systems, "Top", &[]).unwrap()
    };
    assert_eq!(one.initial.get("ps[0].id"), Some(&Value::Int(0)));
    assert_eq!(one.initial.len(), 1);
}

#[test]
fn negative_replicate_is_rejected() {
    let modules = [
        ("Phil", "system Phil { state int id; action T { @.id: id; } spec Main { always T } }"),
        ("Top", "import Phil;\nsystem Top { [Phil] ps; init([string] a) { ps: replicate(0 - 1, p::Phil); } spec Main { fold(||, ps) } }"),
    ];
    let program = check("Top", &modules).unwrap();
    let err = elaborate(&program.systems, "Top", &[]).unwrap_err();
    assert!(matches!(err, ElabError::NegativeCount { count: -1, .. }));
}
