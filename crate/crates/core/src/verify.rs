//! Safety checking, satisfiability over reachable states, and structural
//! deadlock detection.
//!
//! `always φ` holds iff φ is labels-true at every explored node; a violation
//! comes with the BFS-shortest trace. Satisfiability is decided over the
//! reachable states: the first node (in BFS order) whose labeling satisfies
//! the formula is the model.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::explore::{Lts, Trace};
use crate::sema::{PFormula, StaticPropertyDef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    UnresolvedProp(String),
}

impl core::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VerifyError::UnresolvedProp(name) => write!(f, "unknown proposition `{}`", name),
        }
    }
}

/// Outcome of checking one property against one LTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated { node: usize, trace: Trace },
    Inconclusive { bound: usize },
}

fn resolve(formula: &PFormula, lts: &Lts) -> Result<(), VerifyError> {
    match formula {
        PFormula::True | PFormula::False => Ok(()),
        PFormula::Ref(name) => {
            if lts.prop_index(name).is_some() {
                Ok(())
            } else {
                Err(VerifyError::UnresolvedProp(name.clone()))
            }
        }
        PFormula::Not(inner) => resolve(inner, lts),
        PFormula::And(a, b) | PFormula::Or(a, b) | PFormula::Implies(a, b) => {
            resolve(a, lts)?;
            resolve(b, lts)
        }
    }
}

/// Evaluate a propositional formula against a node's labeling.
pub fn eval_formula(formula: &PFormula, lts: &Lts, node: usize) -> Result<bool, VerifyError> {
    Ok(match formula {
        PFormula::True => true,
        PFormula::False => false,
        PFormula::Ref(name) => {
            let idx = lts
                .prop_index(name)
                .ok_or_else(|| VerifyError::UnresolvedProp(name.clone()))?;
            lts.has_prop(node, idx)
        }
        PFormula::Not(inner) => !eval_formula(inner, lts, node)?,
        PFormula::And(a, b) => eval_formula(a, lts, node)? && eval_formula(b, lts, node)?,
        PFormula::Or(a, b) => eval_formula(a, lts, node)? || eval_formula(b, lts, node)?,
        PFormula::Implies(a, b) => !eval_formula(a, lts, node)? || eval_formula(b, lts, node)?,
    })
}

/// Check one static property against the LTS built from its spec.
///
/// `always φ`: scan nodes in BFS order; the first violating node yields a
/// shortest counterexample trace. A bare formula is checked at the initial
/// node only. A truncated exploration without a violation is inconclusive.
pub fn check_property(prop: &StaticPropertyDef, lts: &Lts) -> Result<Verdict, VerifyError> {
    resolve(&prop.formula, lts)?;
    if !prop.always {
        return Ok(if eval_formula(&prop.formula, lts, 0)? {
            Verdict::Holds
        } else {
            Verdict::Violated {
                node: 0,
                trace: Trace { steps: Vec::new() },
            }
        });
    }
    for node in 0..lts.nodes.len() {
        if !eval_formula(&prop.formula, lts, node)? {
            return Ok(Verdict::Violated {
                node,
                trace: lts.trace_to(node),
            });
        }
    }
    Ok(match lts.truncated {
        Some(bound) => Verdict::Inconclusive { bound },
        None => Verdict::Holds,
    })
}

/// Least node (BFS order) whose labeling satisfies the formula; its state
/// vector is the satisfying model. `None` means unsatisfiable over the
/// explored states, to be qualified by the truncation flag.
pub fn find_satisfying_state(formula: &PFormula, lts: &Lts) -> Result<Option<usize>, VerifyError> {
    resolve(formula, lts)?;
    for node in 0..lts.nodes.len() {
        if eval_formula(formula, lts, node)? {
            return Ok(Some(node));
        }
    }
    Ok(None)
}

/// Nodes with no outgoing edges, computed among fully-expanded nodes only.
pub fn detect_deadlock(lts: &Lts) -> Vec<usize> {
    let mut has_out = alloc::vec![false; lts.nodes.len()];
    for e in &lts.edges {
        has_out[e.src as usize] = true;
    }
    (0..lts.nodes.len())
        .filter(|&n| lts.expanded[n] && !has_out[n])
        .collect()
}

/// Parse a formula from source text (the `sat` command input).
pub fn parse_formula(text: &str) -> Result<PFormula, String> {
    use crate::ast::{BinOp, Expr};

    fn convert(expr: &Expr) -> Result<PFormula, String> {
        match expr {
            Expr::Bool(true, _) => Ok(PFormula::True),
            Expr::Bool(false, _) => Ok(PFormula::False),
            Expr::Name(name, _) => Ok(PFormula::Ref(name.clone())),
            Expr::Field(base, field, _) => {
                // qualified prop names like `philosophers[0].Waiting`
                let mut path = String::new();
                render_path(base, &mut path)?;
                path.push('.');
                path.push_str(field);
                Ok(PFormula::Ref(path))
            }
            Expr::Not(inner, _) => Ok(PFormula::Not(alloc::boxed::Box::new(convert(inner)?))),
            Expr::Binary(BinOp::And, a, b, _) => Ok(PFormula::And(
                alloc::boxed::Box::new(convert(a)?),
                alloc::boxed::Box::new(convert(b)?),
            )),
            Expr::Binary(BinOp::Or, a, b, _) => Ok(PFormula::Or(
                alloc::boxed::Box::new(convert(a)?),
                alloc::boxed::Box::new(convert(b)?),
            )),
            Expr::Binary(BinOp::Implies, a, b, _) => Ok(PFormula::Implies(
                alloc::boxed::Box::new(convert(a)?),
                alloc::boxed::Box::new(convert(b)?),
            )),
            other => Err(alloc::format!(
                "formulas may only use propositions and boolean connectives (at {}:{})",
                other.span().line,
                other.span().col
            )),
        }
    }

    fn render_path(expr: &Expr, out: &mut String) -> Result<(), String> {
        match expr {
            Expr::Name(name, _) => {
                out.push_str(name);
                Ok(())
            }
            Expr::Field(base, field, _) => {
                render_path(base, out)?;
                out.push('.');
                out.push_str(field);
                Ok(())
            }
            Expr::Index(base, idx, _) => {
                render_path(base, out)?;
                if let Expr::Int(n, _) = **idx {
                    out.push('[');
                    out.push_str(&n.to_string());
                    out.push(']');
                    Ok(())
                } else {
                    Err("only literal indices are allowed in prop paths".to_string())
                }
            }
            _ => Err("invalid proposition path".to_string()),
        }
    }

    let tokens = crate::lexer::tokenize(text).map_err(|e| e.to_string())?;
    // wrap as a prop body to reuse the expression parser
    let wrapped = alloc::format!("system F {{ prop P {{ {} }} }}", text);
    let _ = tokens;
    let toks = crate::lexer::tokenize(&wrapped).map_err(|e| e.to_string())?;
    let prog = crate::parser::parse(toks).map_err(|e| e.to_string())?;
    let body = &prog.systems[0].props[0].body;
    convert(body)
}
