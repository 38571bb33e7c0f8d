//! Front-end and checker behavior over the corpus and constructed sources.

mod common;

use common::*;
use seni_core::lexer::tokenize;
use seni_core::parser::parse;
use seni_core::sema::{merge_refinement, StaticPropertyDef, PFormula};

#[test]
fn listing_sources_check_clean() {
    for entry in ["PhilosopherAbstract", "Philosopher", "Fork", "Table"] {
        let result = check(entry, &corpus_modules());
        assert!(
            result.is_ok(),
            "{entry} should check clean:\n{}",
            seni_core::diag::render_all(&result.unwrap_err())
        );
    }
}

#[test]
fn abstract_philosopher_shape() {
    let prog = parse(tokenize(PHILOSOPHER_ABSTRACT).unwrap()).unwrap();
    let sys = &prog.systems[0];
    assert_eq!(sys.name, "PhilosopherAbstract");
    assert_eq!(sys.records.len(), 1);
    assert_eq!(sys.state_vars.len(), 3);
    assert_eq!(sys.actions.len(), 2);
    assert_eq!(sys.specs.len(), 1);
    assert_eq!(sys.funcs.len(), 1);
    assert!(sys.init.is_some());
}

#[test]
fn table_static_property_shape() {
    let prog = parse(tokenize(TABLE).unwrap()).unwrap();
    let sys = &prog.systems[0];
    assert_eq!(sys.static_props.len(), 1);
    let p = &sys.static_props[0];
    assert_eq!(p.name, "DeadlockFree");
    assert_eq!(p.spec.as_ref().unwrap().name, "Main");
    assert!(p.always);
    // !(AllWaiting)
    match &p.formula {
        seni_core::ast::Expr::Not(inner, _) => {
            assert!(matches!(&**inner, seni_core::ast::Expr::Name(n, _) if n == "AllWaiting"))
        }
        other => panic!("expected negation, got {other:?}"),
    }
}

#[test]
fn refinement_merge_matches_listings() {
    let checked = check("Philosopher", &corpus_modules()).unwrap();
    let merged = checked.system("Philosopher").unwrap();

    let mut vars: Vec<&str> = merged.state_vars.iter().map(|v| v.name.as_str()).collect();
    vars.sort();
    assert_eq!(vars, ["h", "id", "isThinking"]);

    let mut actions: Vec<&str> = merged.actions.iter().map(|a| a.name.as_str()).collect();
    actions.sort();
    assert_eq!(
        actions,
        ["PickFork", "PickLeft", "PickRight", "ReturnFork", "ReturnLeft", "ReturnRight"]
    );

    let mut specs: Vec<&str> = merged.specs.iter().map(|s| s.name.as_str()).collect();
    specs.sort();
    assert_eq!(specs, ["Main", "PickFork", "ReturnFork"]);

    let mut props: Vec<&str> = merged.props.iter().map(|p| p.name.as_str()).collect();
    props.sort();
    assert_eq!(props, ["Waiting", "WaitingLeft", "WaitingRight"]);

    // inherited pieces
    assert!(merged.record("Holding").is_some());
    assert!(merged.func("getForkId").is_some());
    assert!(!merged.init.params.is_empty());

    // which actions are new vs shadowing
    for name in ["PickLeft", "PickRight", "ReturnLeft", "ReturnRight"] {
        assert!(merged.action(name).unwrap().newly_introduced, "{name}");
    }
    for name in ["PickFork", "ReturnFork"] {
        assert!(!merged.action(name).unwrap().newly_introduced, "{name}");
    }
}

#[test]
fn empty_child_merge_is_parent_shaped() {
    let checked = check("PhilosopherAbstract", &corpus_modules()).unwrap();
    let parent = checked.system("PhilosopherAbstract").unwrap();

    let child_src = "system Child refines PhilosopherAbstract { }";
    let child = parse(tokenize(child_src).unwrap()).unwrap().systems[0].clone();
    let merged = merge_refinement(&child, "child.seni", parent, &checked.systems).unwrap();

    assert_eq!(merged.name, "Child");
    assert_eq!(merged.state_vars, parent.state_vars);
    assert_eq!(merged.records, parent.records);
    assert_eq!(merged.funcs, parent.funcs);
    assert_eq!(merged.init, parent.init);
    assert_eq!(merged.actions.len(), parent.actions.len());
    for (a, b) in merged.actions.iter().zip(&parent.actions) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.assigns, b.assigns);
    }
}

#[test]
fn merge_is_idempotent() {
    let checked = check("PhilosopherAbstract", &corpus_modules()).unwrap();
    let parent = checked.system("PhilosopherAbstract").unwrap();
    let child_src = "system Child refines PhilosopherAbstract { action PickFork { @.isThinking: false; } }";
    let child = parse(tokenize(child_src).unwrap()).unwrap().systems[0].clone();
    let once = merge_refinement(&child, "c.seni", parent, &checked.systems).unwrap();
    let twice = merge_refinement(&child, "c.seni", parent, &checked.systems).unwrap();
    assert_eq!(once, twice);
}

#[test]
fn shadowing_is_total_by_name() {
    let checked = check("Philosopher", &corpus_modules()).unwrap();
    let merged = checked.system("Philosopher").unwrap();
    let parent = checked.system("PhilosopherAbstract").unwrap();
    // Main exists in both; the merged def holds the child's (own) version
    let spec = merged.spec("Main").unwrap();
    assert!(spec.own);
    let _ = parent;
}

#[test]
fn incompatible_redeclaration_rejected() {
    let src = r#"
system P {
    state int id;
    spec Main { always A }
    action A { @.id: 1; }
}
system C refines P {
    state string id;
}
"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("incompatible"), "{}", err[0].message);
    assert_eq!(err[0].line, 8);
}

#[test]
fn action_type_error_has_expected_and_found() {
    let src = r#"system P {
    state bool isThinking;
    action A { @.isThinking: 3; }
    spec Main { always A }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(
        err[0].message.contains("expected `bool`, found `int`"),
        "{}",
        err[0].message
    );
    assert_eq!((err[0].line, err[0].col), (3, 30));
}

#[test]
fn func_state_write_is_impure() {
    let src = r#"system P {
    state int id;
    action A { @.id: f(1); }
    spec Main { always A }
    func f :: int -> int {
        @.id: 0;
        x
    }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("pure"), "{}", err[0].message);
    assert_eq!(err[0].line, 6);
}

#[test]
fn func_state_read_is_impure() {
    let src = r#"system P {
    state int id;
    action A { @.id: f(1); }
    spec Main { always A }
    func f :: int -> int { x + id }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("unresolved name `id`"), "{}", err[0].message);
}

#[test]
fn arithmetic_on_nullable_rejected() {
    let src = r#"system P {
    state int x: null;
    action A { @.x: x + 1; }
    spec Main { always A }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("int?"), "{}", err[0].message);
}

#[test]
fn null_compare_requires_nullable() {
    let src = r#"system P {
    state int x;
    state bool b;
    action A { @.b: x = null; }
    spec Main { always A }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("cannot compare"), "{}", err[0].message);
}

#[test]
fn call_type_flows_through() {
    // getForkId(id, "L") types as int and assigns into a nullable int slot
    let checked = check("PhilosopherAbstract", &corpus_modules()).unwrap();
    let def = checked.system("PhilosopherAbstract").unwrap();
    let f = def.func("getForkId").unwrap();
    assert_eq!(f.params.len(), 2);
    assert_eq!(f.ret, seni_core::types::SemType::int());
}

#[test]
fn table_links_whole_import_closure() {
    let checked = check("Table", &corpus_modules()).unwrap();
    for name in ["Table", "Philosopher", "PhilosopherAbstract", "Fork"] {
        assert!(checked.system(name).is_some(), "{name} missing");
    }
}

#[test]
fn unresolved_spec_atom_is_rejected() {
    let src = r#"system P {
    state int x;
    action A { @.x: 1; }
    spec Main { always (A.Nope) }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("Nope"), "{}", err[0].message);
}

#[test]
fn recursive_prop_rejected() {
    let src = r#"system P {
    state int x;
    action A { @.x: 1; }
    spec Main { always A }
    prop Q { R }
    prop R { Q }
}"#;
    let err = check_single(src).unwrap_err();
    assert!(!err.is_empty());
    assert!(err[0].message.contains("recursively"), "{}", err[0].message);
}

#[test]
fn unknown_proposition_in_property() {
    let src = r#"system P {
    state int x;
    action A { @.x: 1; }
    spec Main { always A }
    static property Safe { Main => always !(Missing) }
}"#;
    let err = check_single(src).unwrap_err();
    assert_eq!(err.len(), 1);
    assert!(err[0].message.contains("unknown proposition"), "{}", err[0].message);
}

#[test]
fn static_property_lowers_to_formula() {
    let checked = check("Table", &corpus_modules()).unwrap();
    let table = checked.system("Table").unwrap();
    let p: &StaticPropertyDef = &table.static_props[0];
    assert_eq!(p.spec, "Main");
    assert!(p.always);
    assert_eq!(
        p.formula,
        PFormula::Not(Box::new(PFormula::Ref("AllWaiting".into())))
    );
}

#[test]
fn diagnostics_render_in_standard_format() {
    let src = "system P { state bool b; action A { @.b: 3; } spec Main { always A } }";
    let err = check_single(src).unwrap_err();
    let rendered = seni_core::diag::render_all(&err);
    assert!(
        rendered.starts_with("main.seni:1:42: error: "),
        "{rendered}"
    );
}
