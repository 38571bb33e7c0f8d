//! Import resolution, refinement merging, and type checking.
//!
//! The result of this stage is a set of [`SystemDef`]s: refinement-merged,
//! fully resolved system definitions whose bodies are typed expressions
//! ([`TExpr`]) ready for elaboration.

mod check;
mod resolve;

pub use check::{check_program, merge_refinement, CheckedProgram};
pub use resolve::{
    resolve_imports, LinkedProgram, LinkedSystem, MapLoader, ModuleLoader, ResolveError,
};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{BinOp, FoldOp, SpecExpr};
use crate::types::SemType;
use crate::value::Value;

/// Names given to curried function parameters, in order. The surface syntax
/// declares parameter types only (`func f :: int -> string -> int`), so
/// bodies refer to parameters by these fixed names.
pub fn implicit_param_name(index: usize) -> String {
    match index {
        0 => String::from("x"),
        1 => String::from("y"),
        2 => String::from("z"),
        3 => String::from("w"),
        n => alloc::format!("p{}", n),
    }
}

/// Conversion performed by a cast expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CastKind {
    /// `(int) s` — parse a decimal string; faulting on malformed input.
    StrToInt,
    /// `(string) n` — decimal rendering.
    IntToStr,
    /// Cast to the operand's own type.
    Identity,
}

/// A type-checked, name-resolved expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TExpr {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    /// Read of a state variable of the enclosing system (bare name or `@.name`).
    ReadState(String),
    /// Read of a parameter or local binding.
    ReadLocal(String),
    Field(Box<TExpr>, String),
    Index(Box<TExpr>, Box<TExpr>),
    Call(String, Vec<TExpr>),
    Not(Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    Cast(CastKind, Box<TExpr>),
    /// Record construction; fields are complete and in declaration order.
    Record(String, Vec<(String, TExpr)>),
    If(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    /// Reference to a sibling prop (prop bodies only).
    PropRef(String),
    /// `fold(&, coll.P)` / `fold(|, coll.P)` over an instance collection.
    FoldProp(FoldOp, String, String),
}

/// Assignment target: a state variable and a chain of record fields within it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetRef {
    pub var: String,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVarDef {
    pub name: String,
    pub ty: SemType,
    /// Constant initial value applied before `init` runs.
    pub default: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: SemType,
    pub default: Option<TExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordDef {
    pub name: String,
    pub fields: Vec<FieldDef>,
}

impl RecordDef {
    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceVarDef {
    pub name: String,
    pub elem_system: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub name: String,
    pub assigns: Vec<(TargetRef, TExpr)>,
    /// Declared by this system itself (not inherited from the refined parent).
    pub own: bool,
    /// Not present in the parent at all (neither shadowing nor inherited).
    pub newly_introduced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectionInit {
    pub collection: String,
    pub count: TExpr,
    pub system: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitDef {
    pub params: Vec<(String, SemType)>,
    pub state_assigns: Vec<(TargetRef, TExpr)>,
    pub collection_assigns: Vec<CollectionInit>,
}

impl InitDef {
    pub fn empty() -> Self {
        InitDef {
            params: Vec::new(),
            state_assigns: Vec::new(),
            collection_assigns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<(String, SemType)>,
    pub ret: SemType,
    pub lets: Vec<(String, TExpr)>,
    pub body: TExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropDef {
    pub name: String,
    pub body: TExpr,
    pub own: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDef {
    pub name: String,
    pub body: SpecExpr,
    pub own: bool,
}

/// Propositional formula over prop names (static properties, `sat` queries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PFormula {
    True,
    False,
    Ref(String),
    Not(Box<PFormula>),
    And(Box<PFormula>, Box<PFormula>),
    Or(Box<PFormula>, Box<PFormula>),
    Implies(Box<PFormula>, Box<PFormula>),
}

/// `static property Name { Spec => always Formula }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticPropertyDef {
    pub name: String,
    /// Spec whose state space is checked; defaults to `Main`.
    pub spec: String,
    pub always: bool,
    pub formula: PFormula,
}

/// A refinement-merged, type-checked system definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDef {
    pub name: String,
    pub refines: Option<String>,
    pub records: Vec<RecordDef>,
    pub state_vars: Vec<StateVarDef>,
    pub instance_vars: Vec<InstanceVarDef>,
    pub actions: Vec<ActionDef>,
    pub init: InitDef,
    pub specs: Vec<SpecDef>,
    pub props: Vec<PropDef>,
    pub static_props: Vec<StaticPropertyDef>,
    pub funcs: Vec<FuncDef>,
}

impl SystemDef {
    pub fn record(&self, name: &str) -> Option<&RecordDef> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn state_var(&self, name: &str) -> Option<&StateVarDef> {
        self.state_vars.iter().find(|v| v.name == name)
    }

    pub fn instance_var(&self, name: &str) -> Option<&InstanceVarDef> {
        self.instance_vars.iter().find(|v| v.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn spec(&self, name: &str) -> Option<&SpecDef> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn prop(&self, name: &str) -> Option<&PropDef> {
        self.props.iter().find(|p| p.name == name)
    }

    pub fn func(&self, name: &str) -> Option<&FuncDef> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn has_main(&self) -> bool {
        self.spec("Main").is_some()
    }
}
