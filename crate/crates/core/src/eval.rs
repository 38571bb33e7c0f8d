//! Pure evaluation of typed expressions over values and state vectors.
//!
//! Evaluation is total for well-typed inputs apart from arithmetic faults
//! (division by zero, overflow), malformed casts, list indexing, and the
//! recursion limit. It never mutates the state it reads.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::BinOp;
use crate::elab::StateVector;
use crate::sema::{CastKind, FuncDef, TExpr};
use crate::value::Value;

/// Default bound on nested pure-function calls.
pub const DEFAULT_RECURSION_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalFault {
    DivisionByZero,
    Overflow,
    InvalidCast(String),
    IndexOutOfBounds { index: i64, len: usize },
    RecursionLimit,
    NegativeCount(i64),
    /// Internal: a reference survived checking but has no runtime binding.
    Unbound(String),
}

impl core::fmt::Display for EvalFault {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalFault::DivisionByZero => write!(f, "division by zero"),
            EvalFault::Overflow => write!(f, "integer overflow"),
            EvalFault::InvalidCast(s) => write!(f, "cannot cast {} ", s),
            EvalFault::IndexOutOfBounds { index, len } => {
                write!(f, "index {} out of bounds (length {})", index, len)
            }
            EvalFault::RecursionLimit => write!(f, "recursion limit exceeded"),
            EvalFault::NegativeCount(n) => write!(f, "replicate count is negative ({})", n),
            EvalFault::Unbound(name) => write!(f, "unbound reference `{}`", name),
        }
    }
}

/// Evaluation context: local bindings, an optional read-only state view, and
/// the pure-function table (keyed `System::func`).
pub struct Env<'a> {
    pub locals: &'a BTreeMap<String, Value>,
    pub state: Option<&'a StateVector>,
    pub funcs: &'a BTreeMap<String, FuncDef>,
    pub depth: usize,
    pub limit: usize,
}

impl<'a> Env<'a> {
    pub fn new(
        locals: &'a BTreeMap<String, Value>,
        state: Option<&'a StateVector>,
        funcs: &'a BTreeMap<String, FuncDef>,
    ) -> Self {
        Env {
            locals,
            state,
            funcs,
            depth: 0,
            limit: DEFAULT_RECURSION_LIMIT,
        }
    }
}

pub fn eval_expr(expr: &TExpr, env: &Env<'_>) -> Result<Value, EvalFault> {
    match expr {
        TExpr::Int(n) => Ok(Value::Int(*n)),
        TExpr::Str(s) => Ok(Value::Str(s.clone())),
        TExpr::Bool(b) => Ok(Value::Bool(*b)),
        TExpr::Null => Ok(Value::Null),
        TExpr::ReadState(path) => env
            .state
            .and_then(|s| s.get(path))
            .cloned()
            .ok_or_else(|| EvalFault::Unbound(path.clone())),
        TExpr::ReadLocal(name) => env
            .locals
            .get(name)
            .cloned()
            .ok_or_else(|| EvalFault::Unbound(name.clone())),
        TExpr::Field(base, field) => {
            let base = eval_expr(base, env)?;
            match base {
                Value::Record(fields) => fields
                    .get(field)
                    .cloned()
                    .ok_or_else(|| EvalFault::Unbound(field.clone())),
                _ => Err(EvalFault::Unbound(field.clone())),
            }
        }
        TExpr::Index(base, index) => {
            let base = eval_expr(base, env)?;
            let index = eval_expr(index, env)?;
            match (base, index) {
                (Value::List(items), Value::Int(i)) => {
                    if i < 0 || i as usize >= items.len() {
                        Err(EvalFault::IndexOutOfBounds {
                            index: i,
                            len: items.len(),
                        })
                    } else {
                        Ok(items[i as usize].clone())
                    }
                }
                _ => Err(EvalFault::Unbound("index".to_string())),
            }
        }
        TExpr::Call(key, args) => {
            let func = env
                .funcs
                .get(key)
                .ok_or_else(|| EvalFault::Unbound(key.clone()))?;
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                values.push(eval_expr(arg, env)?);
            }
            call_func(func, &values, env)
        }
        TExpr::Not(inner) => {
            let v = eval_expr(inner, env)?;
            match v {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                _ => Err(EvalFault::Unbound("!".to_string())),
            }
        }
        TExpr::Binary(op, lhs, rhs) => eval_binary(*op, lhs, rhs, env),
        TExpr::Cast(kind, inner) => {
            let v = eval_expr(inner, env)?;
            match (kind, v) {
                (CastKind::StrToInt, Value::Str(s)) => s
                    .trim()
                    .parse::<i64>()
                    .map(Value::Int)
                    .map_err(|_| EvalFault::InvalidCast(format!("\"{}\" to int", s))),
                (CastKind::IntToStr, Value::Int(n)) => Ok(Value::Str(n.to_string())),
                (_, v) => Ok(v),
            }
        }
        TExpr::Record(_, fields) => {
            let mut out = BTreeMap::new();
            for (name, e) in fields {
                out.insert(name.clone(), eval_expr(e, env)?);
            }
            Ok(Value::Record(out))
        }
        TExpr::If(cond, then_e, else_e) => {
            let c = eval_expr(cond, env)?;
            match c {
                Value::Bool(true) => eval_expr(then_e, env),
                Value::Bool(false) => eval_expr(else_e, env),
                _ => Err(EvalFault::Unbound("if".to_string())),
            }
        }
        TExpr::PropRef(name) | TExpr::FoldProp(_, name, _) => {
            // both are inlined away during elaboration
            Err(EvalFault::Unbound(name.clone()))
        }
    }
}

fn eval_binary(op: BinOp, lhs: &TExpr, rhs: &TExpr, env: &Env<'_>) -> Result<Value, EvalFault> {
    match op {
        BinOp::And => {
            return match eval_expr(lhs, env)? {
                Value::Bool(false) => Ok(Value::Bool(false)),
                _ => eval_expr(rhs, env),
            }
        }
        BinOp::Or => {
            return match eval_expr(lhs, env)? {
                Value::Bool(true) => Ok(Value::Bool(true)),
                _ => eval_expr(rhs, env),
            }
        }
        BinOp::Implies => {
            return match eval_expr(lhs, env)? {
                Value::Bool(false) => Ok(Value::Bool(true)),
                _ => eval_expr(rhs, env),
            }
        }
        _ => {}
    }

    let l = eval_expr(lhs, env)?;
    let r = eval_expr(rhs, env)?;
    match op {
        BinOp::Eq => Ok(Value::Bool(l == r)),
        BinOp::Neq => Ok(Value::Bool(l != r)),
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
            let (Value::Int(a), Value::Int(b)) = (&l, &r) else {
                return Err(EvalFault::Unbound(op.symbol().to_string()));
            };
            let (a, b) = (*a, *b);
            let out = match op {
                BinOp::Add => a.checked_add(b).ok_or(EvalFault::Overflow)?,
                BinOp::Sub => a.checked_sub(b).ok_or(EvalFault::Overflow)?,
                BinOp::Mul => a.checked_mul(b).ok_or(EvalFault::Overflow)?,
                BinOp::Div => {
                    if b == 0 {
                        return Err(EvalFault::DivisionByZero);
                    }
                    a.checked_div(b).ok_or(EvalFault::Overflow)?
                }
                BinOp::Mod => {
                    if b == 0 {
                        return Err(EvalFault::DivisionByZero);
                    }
                    a.checked_rem(b).ok_or(EvalFault::Overflow)?
                }
                _ => unreachable!(),
            };
            Ok(Value::Int(out))
        }
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("handled above"),
    }
}

fn call_func(func: &FuncDef, args: &[Value], env: &Env<'_>) -> Result<Value, EvalFault> {
    if env.depth + 1 > env.limit {
        return Err(EvalFault::RecursionLimit);
    }
    let locals: BTreeMap<String, Value> = func
        .params
        .iter()
        .zip(args)
        .map(|((name, _), value)| (name.clone(), value.clone()))
        .collect();
    eval_in_func(func, locals, env.funcs, env.depth + 1, env.limit)
}

fn eval_in_func(
    func: &FuncDef,
    mut locals: BTreeMap<String, Value>,
    funcs: &BTreeMap<String, FuncDef>,
    depth: usize,
    limit: usize,
) -> Result<Value, EvalFault> {
    for (name, e) in &func.lets {
        let v = {
            let env = Env {
                locals: &locals,
                state: None,
                funcs,
                depth,
                limit,
            };
            eval_expr(e, &env)?
        };
        locals.insert(name.clone(), v);
    }
    let env = Env {
        locals: &locals,
        state: None,
        funcs,
        depth,
        limit,
    };
    eval_expr(&func.body, &env)
}

/// Apply a pure function to argument values. The result depends only on the
/// arguments.
pub fn eval_func(
    func: &FuncDef,
    args: &[Value],
    funcs: &BTreeMap<String, FuncDef>,
) -> Result<Value, EvalFault> {
    let locals: BTreeMap<String, Value> = func
        .params
        .iter()
        .zip(args)
        .map(|((name, _), value)| (name.clone(), value.clone()))
        .collect();
    eval_in_func(func, locals, funcs, 1, DEFAULT_RECURSION_LIMIT)
}
