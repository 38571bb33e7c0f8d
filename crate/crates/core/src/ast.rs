//! Parse trees for programs, systems, expressions, and spec expressions.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::token::Span;

/// A parsed source file: imports in source order, then system declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramAst {
    pub imports: Vec<ImportDecl>,
    pub systems: Vec<SystemAst>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportDecl {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemAst {
    pub name: String,
    pub name_span: Span,
    pub refines: Option<ImportDecl>,
    pub records: Vec<RecordDecl>,
    pub state_vars: Vec<StateVarDecl>,
    pub instance_vars: Vec<InstanceVarDecl>,
    pub actions: Vec<ActionDecl>,
    pub init: Option<InitDecl>,
    pub specs: Vec<SpecDecl>,
    pub props: Vec<PropDecl>,
    pub static_props: Vec<StaticPropDecl>,
    pub funcs: Vec<FuncDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub ty: TypeAst,
    pub name: String,
    pub default: Option<Expr>,
    pub span: Span,
}

/// `state <type> <name> [: default];`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVarDecl {
    pub ty: TypeAst,
    pub name: String,
    pub default: Option<Expr>,
    pub span: Span,
}

/// `[System] name;` — a collection of sub-system instances, sized by `init`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceVarDecl {
    pub elem_system: String,
    pub elem_span: Span,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: String,
    pub name_span: Span,
    pub body: Vec<Assign>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitDecl {
    pub params: Vec<ParamDecl>,
    pub body: Vec<Assign>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub ty: TypeAst,
    pub name: String,
    pub span: Span,
}

/// One assignment statement: `@.path.to.var: expr;` or `name: expr;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assign {
    pub target: AssignTarget,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignTarget {
    /// `@.var[.field...]` — a state-variable path.
    State { path: Vec<String>, span: Span },
    /// Bare name; only instance collections may be assigned this way (in `init`).
    Name { name: String, span: Span },
}

impl AssignTarget {
    pub fn span(&self) -> Span {
        match self {
            AssignTarget::State { span, .. } | AssignTarget::Name { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDecl {
    pub name: String,
    pub name_span: Span,
    pub body: SpecExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropDecl {
    pub name: String,
    pub name_span: Span,
    pub body: Expr,
    pub span: Span,
}

/// `static property Name { [Spec =>] [always] formula }`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticPropDecl {
    pub name: String,
    pub name_span: Span,
    pub spec: Option<ImportDecl>,
    pub always: bool,
    pub formula: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: String,
    pub name_span: Span,
    /// Curried signature `a -> b -> c`: at least two entries, last is the return type.
    pub sig: Vec<TypeAst>,
    pub body: FuncBody,
    pub span: Span,
}

/// Function bodies are let-bindings followed by one result expression.
/// State-variable writes do not belong here; they are kept so the checker can
/// reject them with a proper diagnostic instead of a parse error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncBody {
    pub lets: Vec<LetBinding>,
    pub state_writes: Vec<Assign>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetBinding {
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeAst {
    Int(Span),
    Bool(Span),
    Str(Span),
    List(Box<TypeAst>, Span),
    Named(String, Span),
}

impl TypeAst {
    pub fn span(&self) -> Span {
        match self {
            TypeAst::Int(s) | TypeAst::Bool(s) | TypeAst::Str(s) | TypeAst::List(_, s) => *s,
            TypeAst::Named(_, s) => *s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Neq,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Neq => "/=",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Implies => "=>",
        }
    }
}

/// Fold operator in prop position: `fold(&, xs.P)` / `fold(|, xs.P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldOp {
    All,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Span),
    Str(String, Span),
    Bool(bool, Span),
    Null(Span),
    /// `@` — the state-variable set of the enclosing system.
    AtRef(Span),
    Name(String, Span),
    Field(Box<Expr>, String, Span),
    Index(Box<Expr>, Box<Expr>, Span),
    Call(String, Span, Vec<Expr>, Span),
    /// `{ field: expr; ... }` — record literal; type comes from context.
    Record(Vec<(String, Expr)>, Span),
    Not(Box<Expr>, Span),
    Binary(BinOp, Box<Expr>, Box<Expr>, Span),
    Cast(TypeAst, Box<Expr>, Span),
    If(Box<Expr>, Box<Expr>, Box<Expr>, Span),
    /// `fold(&, collection.Prop)` lifted over an instance collection.
    Fold(FoldOp, Box<Expr>, Span),
    /// `p::System` — instance template, only valid inside `replicate`.
    Template(String, String, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s)
            | Expr::Str(_, s)
            | Expr::Bool(_, s)
            | Expr::Null(s)
            | Expr::AtRef(s)
            | Expr::Name(_, s)
            | Expr::Field(_, _, s)
            | Expr::Index(_, _, s)
            | Expr::Call(_, _, _, s)
            | Expr::Record(_, s)
            | Expr::Not(_, s)
            | Expr::Binary(_, _, _, s)
            | Expr::Cast(_, _, s)
            | Expr::If(_, _, _, s)
            | Expr::Fold(_, _, s)
            | Expr::Template(_, _, s) => *s,
        }
    }

    /// Zero out all spans, recursively. Used to compare structure only.
    pub fn strip_spans(&mut self) {
        match self {
            Expr::Int(_, s)
            | Expr::Str(_, s)
            | Expr::Bool(_, s)
            | Expr::Null(s)
            | Expr::AtRef(s)
            | Expr::Name(_, s)
            | Expr::Template(_, _, s) => *s = Span::DUMMY,
            Expr::Field(e, _, s) | Expr::Not(e, s) | Expr::Fold(_, e, s) => {
                e.strip_spans();
                *s = Span::DUMMY;
            }
            Expr::Cast(ty, e, s) => {
                strip_type_spans(ty);
                e.strip_spans();
                *s = Span::DUMMY;
            }
            Expr::Index(a, b, s) | Expr::Binary(_, a, b, s) => {
                a.strip_spans();
                b.strip_spans();
                *s = Span::DUMMY;
            }
            Expr::Call(_, cs, args, s) => {
                *cs = Span::DUMMY;
                for a in args {
                    a.strip_spans();
                }
                *s = Span::DUMMY;
            }
            Expr::Record(fields, s) => {
                for (_, e) in fields {
                    e.strip_spans();
                }
                *s = Span::DUMMY;
            }
            Expr::If(c, t, e, s) => {
                c.strip_spans();
                t.strip_spans();
                e.strip_spans();
                *s = Span::DUMMY;
            }
        }
    }
}

fn strip_type_spans(ty: &mut TypeAst) {
    match ty {
        TypeAst::Int(s) | TypeAst::Bool(s) | TypeAst::Str(s) | TypeAst::Named(_, s) => {
            *s = Span::DUMMY
        }
        TypeAst::List(inner, s) => {
            strip_type_spans(inner);
            *s = Span::DUMMY;
        }
    }
}

/// Control-flow expressions inside `spec` blocks.
///
/// Precedence, tightest first: `always`, `.` (sequencing), `|` (choice),
/// `||` (parallel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecExpr {
    /// Bare name: action, spec, or instance collection; resolved later.
    Atom(String, Span),
    Seq(Box<SpecExpr>, Box<SpecExpr>, Span),
    Choice(Box<SpecExpr>, Box<SpecExpr>, Span),
    Always(Box<SpecExpr>, Span),
    Par(Box<SpecExpr>, Box<SpecExpr>, Span),
    /// `fold(||, collection)` — parallel composition over a collection.
    FoldPar(String, Span),
}

impl SpecExpr {
    pub fn span(&self) -> Span {
        match self {
            SpecExpr::Atom(_, s)
            | SpecExpr::Seq(_, _, s)
            | SpecExpr::Choice(_, _, s)
            | SpecExpr::Always(_, s)
            | SpecExpr::Par(_, _, s)
            | SpecExpr::FoldPar(_, s) => *s,
        }
    }

    pub fn strip_spans(&mut self) {
        match self {
            SpecExpr::Atom(_, s) | SpecExpr::FoldPar(_, s) => *s = Span::DUMMY,
            SpecExpr::Always(e, s) => {
                e.strip_spans();
                *s = Span::DUMMY;
            }
            SpecExpr::Seq(a, b, s) | SpecExpr::Choice(a, b, s) | SpecExpr::Par(a, b, s) => {
                a.strip_spans();
                b.strip_spans();
                *s = Span::DUMMY;
            }
        }
    }
}
