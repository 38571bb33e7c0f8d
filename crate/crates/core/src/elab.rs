//! Elaboration: from checked system definitions to executable instances.
//!
//! Elaboration recursively instantiates sub-systems, qualifies every state
//! path and action name by instance path (`philosophers[1].isThinking`),
//! runs `init` once to produce the initial state vector, inlines spec
//! references into a process expression, and inlines prop references into
//! closed predicates over the state vector.
//!
//! A spec that shadows an action name decomposes that action; its inlined
//! body is wrapped in a [`ProcessExpr::Scope`] so the explorer can record
//! which step completes the decomposition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{FoldOp, SpecExpr};
use crate::eval::{eval_expr, Env, EvalFault};
use crate::sema::{FuncDef, StaticPropertyDef, SystemDef, TExpr};
use crate::value::Value;

/// The evaluation of all state variables of one elaborated system: an
/// ordered map from fully-qualified state-variable path to value. Two state
/// vectors are equal iff all entries are equal; this equality is state
/// identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateVector {
    entries: BTreeMap<String, Value>,
}

impl StateVector {
    pub fn get(&self, path: &str) -> Option<&Value> {
        self.entries.get(path)
    }

    pub fn insert(&mut self, path: String, value: Value) {
        self.entries.insert(path, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    /// Write through a record-field chain. The key set never changes after
    /// elaboration; only values do.
    pub fn set_path(&mut self, var: &str, fields: &[String], value: Value) {
        let Some(slot) = self.entries.get_mut(var) else {
            return;
        };
        let mut cur = slot;
        for field in fields {
            let Value::Record(map) = cur else { return };
            let Some(next) = map.get_mut(field) else {
                return;
            };
            cur = next;
        }
        *cur = value;
    }

    /// Paths whose values differ from `other`, with the value each side holds.
    pub fn diff<'a>(&'a self, other: &'a StateVector) -> Vec<(&'a str, &'a Value, &'a Value)> {
        let mut out = Vec::new();
        for (path, before) in &self.entries {
            if let Some(after) = other.entries.get(path) {
                if before != after {
                    out.push((path.as_str(), before, after));
                }
            }
        }
        out
    }
}

/// One executable action: qualified name plus its assignment list. All
/// right-hand sides evaluate against the pre-state, then all writes apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionInstance {
    pub qualified_name: String,
    pub assigns: Vec<(QualTarget, TExpr)>,
}

/// Assignment destination: qualified state variable plus record-field chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualTarget {
    pub var: String,
    pub fields: Vec<String>,
}

/// Elaborated control flow. Sequencing normalizes `Done` away, so `Done`
/// never appears as a child of `Seq`; parallel compositions are flattened.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessExpr {
    Done,
    /// Fire one action (index into [`SystemInstance::actions`]).
    Act(u32),
    Seq(Rc<ProcessExpr>, Rc<ProcessExpr>),
    Choice(Rc<ProcessExpr>, Rc<ProcessExpr>),
    Always(Rc<ProcessExpr>),
    Par(Vec<Rc<ProcessExpr>>),
    /// Body of a decomposing spec (index into [`SystemInstance::tags`]); the
    /// step that finishes the body completes the decomposition.
    Scope(u16, Rc<ProcessExpr>),
}

impl ProcessExpr {
    pub fn seq(first: ProcessExpr, second: ProcessExpr) -> ProcessExpr {
        match (first, second) {
            (ProcessExpr::Done, q) => q,
            (p, ProcessExpr::Done) => p,
            (p, q) => ProcessExpr::Seq(Rc::new(p), Rc::new(q)),
        }
    }

    pub fn par(components: Vec<ProcessExpr>) -> ProcessExpr {
        let mut flat: Vec<Rc<ProcessExpr>> = Vec::new();
        for c in components {
            match c {
                ProcessExpr::Done => {}
                ProcessExpr::Par(inner) => flat.extend(inner),
                other => flat.push(Rc::new(other)),
            }
        }
        match flat.len() {
            0 => ProcessExpr::Done,
            1 => (*flat[0]).clone(),
            _ => ProcessExpr::Par(flat),
        }
    }
}

/// A labeled predicate over the state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropInstance {
    pub name: String,
    pub body: TExpr,
}

/// An elaborated, executable transition-system instance.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    pub entry_system: String,
    /// All actions of all instances, in instantiation order.
    pub actions: Vec<ActionInstance>,
    /// Names of decomposing specs, qualified by instance path.
    pub tags: Vec<String>,
    /// Initial evaluation of every state variable; runs `init` exactly once.
    pub initial: StateVector,
    /// The process driven by the entry system's `Main` spec.
    pub main: ProcessExpr,
    /// Processes for entry-system specs referenced by static properties.
    pub spec_processes: BTreeMap<String, ProcessExpr>,
    /// Qualified prop predicates: entry props keep their bare names,
    /// instance props are prefixed (`philosophers[0].Waiting`).
    pub props: Vec<PropInstance>,
    /// Pure functions, keyed `System::name`; instances of a system share.
    pub funcs: BTreeMap<String, FuncDef>,
    /// Static properties of the entry system.
    pub static_props: Vec<StaticPropertyDef>,
}

impl SystemInstance {
    pub fn action(&self, qualified_name: &str) -> Option<(u32, &ActionInstance)> {
        self.actions
            .iter()
            .enumerate()
            .find(|(_, a)| a.qualified_name == qualified_name)
            .map(|(i, a)| (i as u32, a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElabError {
    UnknownSystem(String),
    /// The entry system (or a composed sub-system) has no `Main` spec.
    NoMainSpec(String),
    /// A spec references itself other than through `always`.
    UnboundedRecursion { system: String, spec: String },
    /// `always` applied to a process with nothing to do.
    EmptyAlways { system: String, spec: String },
    MissingSpec { system: String, spec: String },
    /// Evaluation fault while running `init` or sizing a collection.
    InitFault { instance: String, fault: EvalFault },
    NegativeCount { collection: String, count: i64 },
}

impl core::fmt::Display for ElabError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ElabError::UnknownSystem(name) => write!(f, "unknown system `{}`", name),
            ElabError::NoMainSpec(name) => {
                write!(f, "system `{}` has no Main spec and cannot be run", name)
            }
            ElabError::UnboundedRecursion { system, spec } => write!(
                f,
                "spec `{}` of system `{}` is recursive; recursion is only expressible with `always`",
                spec, system
            ),
            ElabError::EmptyAlways { system, spec } => write!(
                f,
                "`always` over an empty process in spec `{}` of system `{}`",
                spec, system
            ),
            ElabError::MissingSpec { system, spec } => {
                write!(f, "system `{}` has no spec `{}`", system, spec)
            }
            ElabError::InitFault { instance, fault } => {
                let label = if instance.is_empty() { "<entry>" } else { instance };
                write!(f, "init of `{}` faulted: {}", label, fault)
            }
            ElabError::NegativeCount { collection, count } => {
                write!(f, "collection `{}` replicated {} times", collection, count)
            }
        }
    }
}

fn qualify(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{}.{}", path, name)
    }
}

/// Elaborate `entry` (which must have a `Main` spec) with the given init
/// arguments into an executable instance.
pub fn elaborate(
    defs: &BTreeMap<String, SystemDef>,
    entry: &str,
    args: &[String],
) -> Result<SystemInstance, ElabError> {
    let entry_def = defs
        .get(entry)
        .ok_or_else(|| ElabError::UnknownSystem(entry.to_string()))?;
    if !entry_def.has_main() {
        return Err(ElabError::NoMainSpec(entry.to_string()));
    }

    let mut elab = Elaborator {
        defs,
        actions: Vec::new(),
        tags: Vec::new(),
        props: Vec::new(),
        funcs: BTreeMap::new(),
        state: StateVector::default(),
    };
    let scope = elab.instantiate(entry_def, "", args)?;

    let main = elab.build_process(entry_def, &scope, "Main")?;

    // Also elaborate every spec a static property refers to.
    let mut spec_processes = BTreeMap::new();
    spec_processes.insert("Main".to_string(), main.clone());
    for sp in &entry_def.static_props {
        if !spec_processes.contains_key(&sp.spec) {
            let p = elab.build_process(entry_def, &scope, &sp.spec)?;
            spec_processes.insert(sp.spec.clone(), p);
        }
    }

    Ok(SystemInstance {
        entry_system: entry.to_string(),
        actions: elab.actions,
        tags: elab.tags,
        initial: elab.state,
        main,
        spec_processes,
        props: elab.props,
        funcs: elab.funcs,
        static_props: entry_def.static_props.clone(),
    })
}

/// Everything one instance contributes, needed to build processes over it.
struct InstanceScope {
    path: String,
    /// Local action name -> global action index.
    actions: BTreeMap<String, u32>,
    /// Collection name -> (member count, Main process of each member).
    collections: BTreeMap<String, (usize, Vec<ProcessExpr>)>,
}

struct Elaborator<'a> {
    defs: &'a BTreeMap<String, SystemDef>,
    actions: Vec<ActionInstance>,
    tags: Vec<String>,
    props: Vec<PropInstance>,
    funcs: BTreeMap<String, FuncDef>,
    state: StateVector,
}

impl<'a> Elaborator<'a> {
    fn instantiate(
        &mut self,
        def: &SystemDef,
        path: &str,
        args: &[String],
    ) -> Result<InstanceScope, ElabError> {
        // state variables start from their declared defaults
        for var in &def.state_vars {
            self.state
                .insert(qualify(path, &var.name), var.default.clone());
        }

        // pure functions are shared per system
        for func in &def.funcs {
            let key = format!("{}::{}", def.name, func.name);
            if !self.funcs.contains_key(&key) {
                let mut rewritten = func.clone();
                rewritten.lets = func
                    .lets
                    .iter()
                    .map(|(n, e)| (n.clone(), self.rewrite_func_expr(e, &def.name)))
                    .collect();
                rewritten.body = self.rewrite_func_expr(&func.body, &def.name);
                self.funcs.insert(key, rewritten);
            }
        }

        // init arguments: a `[string]` parameter binds the whole list, a
        // `string` parameter binds the next positional argument
        let mut locals: BTreeMap<String, Value> = BTreeMap::new();
        let mut positional = 0usize;
        for (name, ty) in &def.init.params {
            use crate::types::BaseType;
            let v = match &ty.base {
                BaseType::List(_) => {
                    Value::List(args.iter().map(|a| Value::Str(a.clone())).collect())
                }
                _ => {
                    let v = args
                        .get(positional)
                        .map(|a| Value::Str(a.clone()))
                        .unwrap_or(Value::Null);
                    positional += 1;
                    v
                }
            };
            locals.insert(name.clone(), v);
        }

        // instantiate collections (structural, before state writes apply)
        let mut collections: BTreeMap<String, (usize, Vec<ProcessExpr>)> = BTreeMap::new();
        for iv in &def.instance_vars {
            collections.insert(iv.name.clone(), (0, Vec::new()));
        }
        for cinit in &def.init.collection_assigns {
            let count = {
                let env = Env::new(&locals, Some(&self.state), &self.funcs);
                eval_expr(&self.rewrite_expr(&cinit.count, path, &def.name), &env).map_err(
                    |fault| ElabError::InitFault {
                        instance: path.to_string(),
                        fault,
                    },
                )?
            };
            let Value::Int(n) = count else {
                return Err(ElabError::InitFault {
                    instance: path.to_string(),
                    fault: EvalFault::Unbound("replicate count".to_string()),
                });
            };
            if n < 0 {
                return Err(ElabError::NegativeCount {
                    collection: cinit.collection.clone(),
                    count: n,
                });
            }
            let elem_def = self
                .defs
                .get(&cinit.system)
                .ok_or_else(|| ElabError::UnknownSystem(cinit.system.clone()))?;
            let mut mains = Vec::new();
            for i in 0..n {
                let child_path = format!("{}[{}]", qualify(path, &cinit.collection), i);
                let child_args = [i.to_string()];
                let child_scope = self.instantiate(elem_def, &child_path, &child_args)?;
                if elem_def.has_main() {
                    mains.push(self.build_process(elem_def, &child_scope, "Main")?);
                }
            }
            collections.insert(cinit.collection.clone(), (n as usize, mains));
        }

        // run init atomically: all right-hand sides see the default state
        let mut writes: Vec<(QualTarget, Value)> = Vec::new();
        for (target, expr) in &def.init.state_assigns {
            let rewritten = self.rewrite_expr(expr, path, &def.name);
            let env = Env::new(&locals, Some(&self.state), &self.funcs);
            let v = eval_expr(&rewritten, &env).map_err(|fault| ElabError::InitFault {
                instance: path.to_string(),
                fault,
            })?;
            writes.push((
                QualTarget {
                    var: qualify(path, &target.var),
                    fields: target.fields.clone(),
                },
                v,
            ));
        }
        for (target, v) in writes {
            self.state.set_path(&target.var, &target.fields, v);
        }

        // actions
        let mut action_ids = BTreeMap::new();
        for action in &def.actions {
            let assigns = action
                .assigns
                .iter()
                .map(|(t, e)| {
                    (
                        QualTarget {
                            var: qualify(path, &t.var),
                            fields: t.fields.clone(),
                        },
                        self.rewrite_expr(e, path, &def.name),
                    )
                })
                .collect();
            let id = self.actions.len() as u32;
            self.actions.push(ActionInstance {
                qualified_name: qualify(path, &action.name),
                assigns,
            });
            action_ids.insert(action.name.clone(), id);
        }

        // props: inline sibling references, qualify state reads
        for prop in &def.props {
            let mut stack = BTreeSet::new();
            let body = self.inline_prop(&prop.body, def, path, &collections, &mut stack);
            self.props.push(PropInstance {
                name: qualify(path, &prop.name),
                body,
            });
        }

        Ok(InstanceScope {
            path: path.to_string(),
            actions: action_ids,
            collections,
        })
    }

    /// Qualify state reads and function calls in an action/init/prop body.
    fn rewrite_expr(&self, expr: &TExpr, path: &str, system: &str) -> TExpr {
        match expr {
            TExpr::ReadState(var) => TExpr::ReadState(qualify(path, var)),
            TExpr::Call(name, args) => TExpr::Call(
                format!("{}::{}", system, name),
                args.iter()
                    .map(|a| self.rewrite_expr(a, path, system))
                    .collect(),
            ),
            TExpr::Field(base, f) => {
                TExpr::Field(alloc::boxed::Box::new(self.rewrite_expr(base, path, system)), f.clone())
            }
            TExpr::Index(a, b) => TExpr::Index(
                alloc::boxed::Box::new(self.rewrite_expr(a, path, system)),
                alloc::boxed::Box::new(self.rewrite_expr(b, path, system)),
            ),
            TExpr::Not(e) => TExpr::Not(alloc::boxed::Box::new(self.rewrite_expr(e, path, system))),
            TExpr::Binary(op, a, b) => TExpr::Binary(
                *op,
                alloc::boxed::Box::new(self.rewrite_expr(a, path, system)),
                alloc::boxed::Box::new(self.rewrite_expr(b, path, system)),
            ),
            TExpr::Cast(k, e) => {
                TExpr::Cast(*k, alloc::boxed::Box::new(self.rewrite_expr(e, path, system)))
            }
            TExpr::Record(name, fields) => TExpr::Record(
                name.clone(),
                fields
                    .iter()
                    .map(|(n, e)| (n.clone(), self.rewrite_expr(e, path, system)))
                    .collect(),
            ),
            TExpr::If(c, t, e) => TExpr::If(
                alloc::boxed::Box::new(self.rewrite_expr(c, path, system)),
                alloc::boxed::Box::new(self.rewrite_expr(t, path, system)),
                alloc::boxed::Box::new(self.rewrite_expr(e, path, system)),
            ),
            other => other.clone(),
        }
    }

    /// Function bodies only need call qualification; they cannot touch state.
    fn rewrite_func_expr(&self, expr: &TExpr, system: &str) -> TExpr {
        self.rewrite_expr(expr, "", system)
    }

    /// Expand prop references and collection folds into a closed predicate.
    fn inline_prop(
        &self,
        expr: &TExpr,
        def: &SystemDef,
        path: &str,
        collections: &BTreeMap<String, (usize, Vec<ProcessExpr>)>,
        stack: &mut BTreeSet<String>,
    ) -> TExpr {
        match expr {
            TExpr::PropRef(name) => {
                if !stack.insert(name.clone()) {
                    // cycle; sema already rejected it
                    return TExpr::Bool(false);
                }
                let inlined = match def.prop(name) {
                    Some(p) => self.inline_prop(&p.body, def, path, collections, stack),
                    None => TExpr::Bool(false),
                };
                stack.remove(name);
                inlined
            }
            TExpr::FoldProp(op, coll, prop_name) => {
                let elem_system = def
                    .instance_vars
                    .iter()
                    .find(|v| v.name == *coll)
                    .map(|v| v.elem_system.clone());
                let count = collections.get(coll).map_or(0, |c| c.0);
                let mut terms = Vec::new();
                if let Some(elem_def) = elem_system.and_then(|s| self.defs.get(&s)) {
                    for i in 0..count {
                        let child_path = format!("{}[{}]", qualify(path, coll), i);
                        if let Some(p) = elem_def.prop(prop_name) {
                            let mut child_stack = BTreeSet::new();
                            // member props fold over the member's own scope
                            let empty = BTreeMap::new();
                            terms.push(self.inline_prop(
                                &p.body,
                                elem_def,
                                &child_path,
                                &empty,
                                &mut child_stack,
                            ));
                        }
                    }
                }
                let (mut acc, op) = match op {
                    FoldOp::All => (TExpr::Bool(true), crate::ast::BinOp::And),
                    FoldOp::Any => (TExpr::Bool(false), crate::ast::BinOp::Or),
                };
                for (i, t) in terms.into_iter().enumerate() {
                    acc = if i == 0 {
                        t
                    } else {
                        TExpr::Binary(op, alloc::boxed::Box::new(acc), alloc::boxed::Box::new(t))
                    };
                }
                acc
            }
            TExpr::ReadState(var) => TExpr::ReadState(qualify(path, var)),
            TExpr::Call(name, args) => TExpr::Call(
                format!("{}::{}", def.name, name),
                args.iter()
                    .map(|a| self.inline_prop(a, def, path, collections, stack))
                    .collect(),
            ),
            TExpr::Field(base, f) => TExpr::Field(
                alloc::boxed::Box::new(self.inline_prop(base, def, path, collections, stack)),
                f.clone(),
            ),
            TExpr::Index(a, b) => TExpr::Index(
                alloc::boxed::Box::new(self.inline_prop(a, def, path, collections, stack)),
                alloc::boxed::Box::new(self.inline_prop(b, def, path, collections, stack)),
            ),
            TExpr::Not(e) => {
                TExpr::Not(alloc::boxed::Box::new(self.inline_prop(e, def, path, collections, stack)))
            }
            TExpr::Binary(op, a, b) => TExpr::Binary(
                *op,
                alloc::boxed::Box::new(self.inline_prop(a, def, path, collections, stack)),
                alloc::boxed::Box::new(self.inline_prop(b, def, path, collections, stack)),
            ),
            TExpr::Cast(k, e) => TExpr::Cast(
                *k,
                alloc::boxed::Box::new(self.inline_prop(e, def, path, collections, stack)),
            ),
            TExpr::Record(name, fields) => TExpr::Record(
                name.clone(),
                fields
                    .iter()
                    .map(|(n, e)| (n.clone(), self.inline_prop(e, def, path, collections, stack)))
                    .collect(),
            ),
            TExpr::If(c, t, e) => TExpr::If(
                alloc::boxed::Box::new(self.inline_prop(c, def, path, collections, stack)),
                alloc::boxed::Box::new(self.inline_prop(t, def, path, collections, stack)),
                alloc::boxed::Box::new(self.inline_prop(e, def, path, collections, stack)),
            ),
            other => other.clone(),
        }
    }

    /// Build the process for one spec of one instance, inlining spec
    /// references. Only `always` may loop; any other self-reference is
    /// rejected.
    fn build_process(
        &mut self,
        def: &SystemDef,
        scope: &InstanceScope,
        spec_name: &str,
    ) -> Result<ProcessExpr, ElabError> {
        let spec = def.spec(spec_name).ok_or_else(|| ElabError::MissingSpec {
            system: def.name.clone(),
            spec: spec_name.to_string(),
        })?;
        let mut stack = alloc::vec![spec_name.to_string()];
        self.build_spec_expr(&spec.body, def, scope, &mut stack)
    }

    fn build_spec_expr(
        &mut self,
        expr: &SpecExpr,
        def: &SystemDef,
        scope: &InstanceScope,
        stack: &mut Vec<String>,
    ) -> Result<ProcessExpr, ElabError> {
        match expr {
            SpecExpr::Atom(name, _) => self.build_atom(name, def, scope, stack),
            SpecExpr::Seq(a, b, _) => {
                let first = self.build_spec_expr(a, def, scope, stack)?;
                let second = self.build_spec_expr(b, def, scope, stack)?;
                Ok(ProcessExpr::seq(first, second))
            }
            SpecExpr::Choice(a, b, _) => {
                let left = self.build_spec_expr(a, def, scope, stack)?;
                let right = self.build_spec_expr(b, def, scope, stack)?;
                Ok(ProcessExpr::Choice(Rc::new(left), Rc::new(right)))
            }
            SpecExpr::Par(a, b, _) => {
                let left = self.build_spec_expr(a, def, scope, stack)?;
                let right = self.build_spec_expr(b, def, scope, stack)?;
                Ok(ProcessExpr::par(alloc::vec![left, right]))
            }
            SpecExpr::Always(body, _) => {
                let inner = self.build_spec_expr(body, def, scope, stack)?;
                if inner == ProcessExpr::Done {
                    return Err(ElabError::EmptyAlways {
                        system: def.name.clone(),
                        spec: stack.first().cloned().unwrap_or_default(),
                    });
                }
                Ok(ProcessExpr::Always(Rc::new(inner)))
            }
            SpecExpr::FoldPar(coll, _) => self.build_collection_par(coll, def, scope),
        }
    }

    fn build_collection_par(
        &mut self,
        coll: &str,
        def: &SystemDef,
        scope: &InstanceScope,
    ) -> Result<ProcessExpr, ElabError> {
        let Some((count, mains)) = scope.collections.get(coll) else {
            return Err(ElabError::UnknownSystem(coll.to_string()));
        };
        // a collection of Main-less systems cannot be composed
        if mains.len() < *count {
            let elem = def
                .instance_var(coll)
                .map(|v| v.elem_system.clone())
                .unwrap_or_default();
            return Err(ElabError::NoMainSpec(elem));
        }
        Ok(ProcessExpr::par(mains.clone()))
    }

    fn build_atom(
        &mut self,
        name: &str,
        def: &SystemDef,
        scope: &InstanceScope,
        stack: &mut Vec<String>,
    ) -> Result<ProcessExpr, ElabError> {
        // a spec wins over an action of the same name; the spec decomposes it
        if let Some(spec) = def.spec(name) {
            if stack.iter().any(|s| s == name) {
                return Err(ElabError::UnboundedRecursion {
                    system: def.name.clone(),
                    spec: name.to_string(),
                });
            }
            stack.push(name.to_string());
            let body = self.build_spec_expr(&spec.body.clone(), def, scope, stack)?;
            stack.pop();
            if def.action(name).is_some() {
                let tag_name = qualify(&scope.path, name);
                let tag = match self.tags.iter().position(|t| t == &tag_name) {
                    Some(i) => i as u16,
                    None => {
                        self.tags.push(tag_name);
                        (self.tags.len() - 1) as u16
                    }
                };
                return Ok(ProcessExpr::Scope(tag, Rc::new(body)));
            }
            return Ok(body);
        }
        if let Some(&id) = scope.actions.get(name) {
            return Ok(ProcessExpr::Act(id));
        }
        if scope.collections.contains_key(name) {
            return self.build_collection_par(name, def, scope);
        }
        Err(ElabError::UnknownSystem(name.to_string()))
    }
}

/// Apply one action atomically: evaluate every right-hand side against the
/// pre-state, then apply all writes. The pre-state is unchanged.
pub fn apply_action(
    pre: &StateVector,
    action: &ActionInstance,
    funcs: &BTreeMap<String, FuncDef>,
) -> Result<StateVector, EvalFault> {
    let locals = BTreeMap::new();
    let env = Env::new(&locals, Some(pre), funcs);
    let mut writes = Vec::with_capacity(action.assigns.len());
    for (target, expr) in &action.assigns {
        writes.push((target, eval_expr(expr, &env)?));
    }
    let mut post = pre.clone();
    for (target, value) in writes {
        post.set_path(&target.var, &target.fields, value);
    }
    Ok(post)
}

/// Evaluate a prop predicate on a state vector.
pub fn eval_prop(
    prop: &PropInstance,
    state: &StateVector,
    funcs: &BTreeMap<String, FuncDef>,
) -> Result<bool, EvalFault> {
    let locals = BTreeMap::new();
    let env = Env::new(&locals, Some(state), funcs);
    match eval_expr(&prop.body, &env)? {
        Value::Bool(b) => Ok(b),
        _ => Err(EvalFault::Unbound(prop.name.clone())),
    }
}
