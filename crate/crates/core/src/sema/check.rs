//! Refinement merging and type checking.
//!
//! Systems are processed in dependency order (refinement parents and
//! instance-collection element systems first). Each system is checked against
//! its merged context: the child inherits the parent's records, state
//! variables, funcs, and init unless redeclared, while specs, actions, and
//! props shadow by name.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{
    self, Assign, AssignTarget, BinOp, Expr, SpecExpr, SystemAst, TypeAst,
};
use crate::diag::{Diagnostic, Diagnostics};
use crate::token::Span;
use crate::types::{BaseType, SemType};
use crate::value::Value;

use super::{
    implicit_param_name, resolve::LinkedProgram, ActionDef, CastKind, CollectionInit, FieldDef,
    FuncDef, InitDef, InstanceVarDef, PFormula, PropDef, RecordDef, SpecDef, StateVarDef,
    StaticPropertyDef, SystemDef, TExpr, TargetRef,
};

/// All checked definitions, plus the dependency order they were checked in.
#[derive(Debug, Clone)]
pub struct CheckedProgram {
    pub systems: BTreeMap<String, SystemDef>,
    pub order: Vec<String>,
}

impl CheckedProgram {
    pub fn system(&self, name: &str) -> Option<&SystemDef> {
        self.systems.get(name)
    }
}

/// Type-check a linked program into system definitions.
///
/// On failure returns every diagnostic, in source order per file.
pub fn check_program(linked: &LinkedProgram) -> Result<CheckedProgram, Diagnostics> {
    let index: BTreeMap<&str, usize> = linked
        .systems
        .iter()
        .enumerate()
        .map(|(i, s)| (s.ast.name.as_str(), i))
        .collect();

    // Dependency order over refinement parents and collection element systems.
    let mut order: Vec<usize> = Vec::new();
    let mut state = alloc::vec![0u8; linked.systems.len()]; // 0 new, 1 visiting, 2 done
    let mut diags_by_sys: Vec<Diagnostics> = alloc::vec![Vec::new(); linked.systems.len()];

    fn visit(
        i: usize,
        linked: &LinkedProgram,
        index: &BTreeMap<&str, usize>,
        state: &mut Vec<u8>,
        order: &mut Vec<usize>,
        diags: &mut Vec<Diagnostics>,
    ) {
        if state[i] != 0 {
            if state[i] == 1 {
                let sys = &linked.systems[i];
                diags[i].push(Diagnostic::error(
                    &sys.file,
                    sys.ast.name_span,
                    format!("cyclic refinement or instantiation involving `{}`", sys.ast.name),
                ));
            }
            return;
        }
        state[i] = 1;
        let sys = &linked.systems[i];
        let mut deps: Vec<&str> = Vec::new();
        if let Some(r) = &sys.ast.refines {
            deps.push(r.name.as_str());
        }
        for iv in &sys.ast.instance_vars {
            deps.push(iv.elem_system.as_str());
        }
        for dep in deps {
            if let Some(&j) = index.get(dep) {
                visit(j, linked, index, state, order, diags);
            }
        }
        state[i] = 2;
        order.push(i);
    }

    for i in 0..linked.systems.len() {
        visit(
            i,
            linked,
            &index,
            &mut state,
            &mut order,
            &mut diags_by_sys,
        );
    }

    let mut checked: BTreeMap<String, SystemDef> = BTreeMap::new();
    let mut checked_order: Vec<String> = Vec::new();

    for &i in &order {
        let sys = &linked.systems[i];
        let parent = match &sys.ast.refines {
            Some(r) => match checked.get(r.name.as_str()) {
                Some(p) => Some(p.clone()),
                None => {
                    diags_by_sys[i].push(Diagnostic::error(
                        &sys.file,
                        r.span,
                        format!("unknown system `{}` in refines clause", r.name),
                    ));
                    None
                }
            },
            None => None,
        };
        let (def, mut diags) = check_system(&sys.ast, &sys.file, parent.as_ref(), &checked);
        diags_by_sys[i].append(&mut diags);
        checked_order.push(def.name.clone());
        checked.insert(def.name.clone(), def);
    }

    // Report in file-load order, source order within each file.
    let all: Diagnostics = diags_by_sys.into_iter().flatten().collect();
    if all.is_empty() {
        Ok(CheckedProgram {
            systems: checked,
            order: checked_order,
        })
    } else {
        Err(all)
    }
}

/// Merge one child AST onto an already-checked parent definition.
///
/// `others` supplies element systems for instance collections.
pub fn merge_refinement(
    child: &SystemAst,
    file: &str,
    parent: &SystemDef,
    others: &BTreeMap<String, SystemDef>,
) -> Result<SystemDef, Diagnostics> {
    let (def, diags) = check_system(child, file, Some(parent), others);
    if diags.is_empty() {
        Ok(def)
    } else {
        Err(diags)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BodyKind {
    Action,
    Init,
    Func,
    Prop,
}

struct Checker<'a> {
    file: &'a str,
    ctx: &'a BTreeMap<String, SystemDef>,
    records: Vec<RecordDef>,
    state_vars: Vec<StateVarDef>,
    instance_vars: Vec<InstanceVarDef>,
    func_sigs: BTreeMap<String, (Vec<SemType>, SemType)>,
    prop_names: BTreeSet<String>,
    spec_names: BTreeSet<String>,
    action_names: BTreeSet<String>,
    diags: Diagnostics,
}

fn check_system(
    ast: &SystemAst,
    file: &str,
    parent: Option<&SystemDef>,
    ctx: &BTreeMap<String, SystemDef>,
) -> (SystemDef, Diagnostics) {
    let mut ck = Checker {
        file,
        ctx,
        records: parent.map_or(Vec::new(), |p| p.records.clone()),
        state_vars: parent.map_or(Vec::new(), |p| p.state_vars.clone()),
        instance_vars: parent.map_or(Vec::new(), |p| p.instance_vars.clone()),
        func_sigs: BTreeMap::new(),
        prop_names: BTreeSet::new(),
        spec_names: BTreeSet::new(),
        action_names: BTreeSet::new(),
        diags: Vec::new(),
    };

    // -- records --
    for rec in &ast.records {
        let lowered = ck.check_record(rec);
        if let Some(slot) = ck.records.iter_mut().find(|r| r.name == lowered.name) {
            *slot = lowered;
        } else {
            ck.records.push(lowered);
        }
    }

    // -- state variables --
    for var in &ast.state_vars {
        let Some(ty) = ck.lower_type(&var.ty) else {
            continue;
        };
        let nullable = matches!(var.default, Some(Expr::Null(_)));
        let ty = if nullable { ty.nullable() } else { ty };
        if let Some(existing) = ck.state_vars.iter().find(|v| v.name == var.name) {
            if !existing.ty.same_base(&ty) || existing.ty.nullable != ty.nullable {
                ck.diags.push(Diagnostic::error(
                    file,
                    var.span,
                    format!(
                        "state variable `{}` redeclared with incompatible type: `{}` was `{}`",
                        var.name, ty, existing.ty
                    ),
                ));
                continue;
            }
        }
        let default = match &var.default {
            Some(expr) => ck.const_value(expr, &ty).unwrap_or(Value::Null),
            None => ck.zero_value(&ty),
        };
        let def = StateVarDef {
            name: var.name.clone(),
            ty,
            default,
        };
        if let Some(slot) = ck.state_vars.iter_mut().find(|v| v.name == var.name) {
            *slot = def;
        } else {
            ck.state_vars.push(def);
        }
    }

    // -- instance collections --
    for iv in &ast.instance_vars {
        if !ctx.contains_key(&iv.elem_system) {
            ck.diags.push(Diagnostic::error(
                file,
                iv.elem_span,
                format!("unknown system `{}`", iv.elem_system),
            ));
            continue;
        }
        let def = InstanceVarDef {
            name: iv.name.clone(),
            elem_system: iv.elem_system.clone(),
        };
        if let Some(slot) = ck.instance_vars.iter_mut().find(|v| v.name == iv.name) {
            *slot = def;
        } else {
            ck.instance_vars.push(def);
        }
    }

    // -- function signatures first, then bodies --
    let mut funcs: Vec<FuncDef> = parent.map_or(Vec::new(), |p| p.funcs.clone());
    for f in &funcs {
        ck.func_sigs.insert(
            f.name.clone(),
            (f.params.iter().map(|(_, t)| t.clone()).collect(), f.ret.clone()),
        );
    }
    let mut child_sigs: Vec<Option<(Vec<SemType>, SemType)>> = Vec::new();
    for f in &ast.funcs {
        let mut tys: Vec<SemType> = Vec::new();
        let mut ok = true;
        for t in &f.sig {
            match ck.lower_type(t) {
                Some(ty) => tys.push(ty),
                None => ok = false,
            }
        }
        if !ok || tys.len() < 2 {
            child_sigs.push(None);
            continue;
        }
        let ret = tys.pop().unwrap();
        ck.func_sigs.insert(f.name.clone(), (tys.clone(), ret.clone()));
        child_sigs.push(Some((tys, ret)));
    }
    for (f, sig) in ast.funcs.iter().zip(child_sigs) {
        let Some((params, ret)) = sig else { continue };
        let named: Vec<(String, SemType)> = params
            .into_iter()
            .enumerate()
            .map(|(i, t)| (implicit_param_name(i), t))
            .collect();
        let def = ck.check_func(f, named, ret);
        if let Some(slot) = funcs.iter_mut().find(|g| g.name == f.name) {
            *slot = def;
        } else {
            funcs.push(def);
        }
    }

    // -- name sets for atom / reference resolution --
    ck.action_names = parent
        .map_or(Vec::new(), |p| p.actions.clone())
        .iter()
        .map(|a| a.name.clone())
        .collect();
    for a in &ast.actions {
        ck.action_names.insert(a.name.clone());
    }
    ck.spec_names = parent
        .map_or(Vec::new(), |p| p.specs.clone())
        .iter()
        .map(|s| s.name.clone())
        .collect();
    for s in &ast.specs {
        ck.spec_names.insert(s.name.clone());
    }
    ck.prop_names = parent
        .map_or(Vec::new(), |p| p.props.clone())
        .iter()
        .map(|p| p.name.clone())
        .collect();
    for p in &ast.props {
        ck.prop_names.insert(p.name.clone());
    }

    // -- actions --
    let mut actions: Vec<ActionDef> = parent.map_or(Vec::new(), |p| {
        p.actions
            .iter()
            .map(|a| ActionDef {
                own: false,
                newly_introduced: false,
                ..a.clone()
            })
            .collect()
    });
    for a in &ast.actions {
        let assigns = ck.check_action_body(&a.body);
        let def = ActionDef {
            name: a.name.clone(),
            assigns,
            own: true,
            newly_introduced: parent.map_or(true, |p| p.action(&a.name).is_none()),
        };
        if let Some(slot) = actions.iter_mut().find(|x| x.name == a.name) {
            *slot = def;
        } else {
            actions.push(def);
        }
    }

    // -- init --
    let init = match &ast.init {
        Some(decl) => ck.check_init(decl),
        None => parent.map_or(InitDef::empty(), |p| p.init.clone()),
    };

    // every collection must be sized by init
    for iv in &ck.instance_vars {
        if !init
            .collection_assigns
            .iter()
            .any(|c| c.collection == iv.name)
        {
            ck.diags.push(Diagnostic::error(
                file,
                ast.name_span,
                format!("instance collection `{}` is never initialized", iv.name),
            ));
        }
    }

    // -- props --
    let mut props: Vec<PropDef> = parent.map_or(Vec::new(), |p| {
        p.props
            .iter()
            .map(|q| PropDef {
                own: false,
                ..q.clone()
            })
            .collect()
    });
    for p in &ast.props {
        let body = ck
            .check_expr(
                &p.body,
                &mut Locals::new(BodyKind::Prop),
                Some(&SemType::bool()),
            )
            .map(|(t, _)| t)
            .unwrap_or(TExpr::Bool(false));
        let def = PropDef {
            name: p.name.clone(),
            body,
            own: true,
        };
        if let Some(slot) = props.iter_mut().find(|x| x.name == p.name) {
            *slot = def;
        } else {
            props.push(def);
        }
    }
    ck.check_prop_cycles(&props, ast);

    // -- specs --
    let mut specs: Vec<SpecDef> = parent.map_or(Vec::new(), |p| {
        p.specs
            .iter()
            .map(|s| SpecDef {
                own: false,
                ..s.clone()
            })
            .collect()
    });
    for s in &ast.specs {
        ck.check_spec_atoms(&s.body);
        let def = SpecDef {
            name: s.name.clone(),
            body: s.body.clone(),
            own: true,
        };
        if let Some(slot) = specs.iter_mut().find(|x| x.name == s.name) {
            *slot = def;
        } else {
            specs.push(def);
        }
    }

    // -- static properties --
    let mut static_props: Vec<StaticPropertyDef> =
        parent.map_or(Vec::new(), |p| p.static_props.clone());
    for sp in &ast.static_props {
        let spec_name = sp
            .spec
            .as_ref()
            .map(|s| s.name.clone())
            .unwrap_or_else(|| "Main".to_string());
        if !ck.spec_names.contains(&spec_name) {
            let span = sp.spec.as_ref().map_or(sp.name_span, |s| s.span);
            ck.diags.push(Diagnostic::error(
                file,
                span,
                format!("unknown spec `{}` in static property", spec_name),
            ));
        }
        let formula = ck
            .pformula(&sp.formula)
            .unwrap_or(PFormula::True);
        let def = StaticPropertyDef {
            name: sp.name.clone(),
            spec: spec_name,
            always: sp.always,
            formula,
        };
        if let Some(slot) = static_props.iter_mut().find(|x| x.name == sp.name) {
            *slot = def;
        } else {
            static_props.push(def);
        }
    }

    let def = SystemDef {
        name: ast.name.clone(),
        refines: ast.refines.as_ref().map(|r| r.name.clone()),
        records: ck.records.clone(),
        state_vars: ck.state_vars.clone(),
        instance_vars: ck.instance_vars.clone(),
        actions,
        init,
        specs,
        props,
        static_props,
        funcs,
    };
    (def, ck.diags)
}

/// Local bindings in scope while checking one body.
struct Locals {
    kind: BodyKind,
    names: Vec<(String, SemType)>,
}

impl Locals {
    fn new(kind: BodyKind) -> Self {
        Locals {
            kind,
            names: Vec::new(),
        }
    }

    fn lookup(&self, name: &str) -> Option<&SemType> {
        self.names
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, span: Span, message: String) {
        self.diags.push(Diagnostic::error(self.file, span, message));
    }

    fn lower_type(&mut self, ty: &TypeAst) -> Option<SemType> {
        match ty {
            TypeAst::Int(_) => Some(SemType::int()),
            TypeAst::Bool(_) => Some(SemType::bool()),
            TypeAst::Str(_) => Some(SemType::str()),
            TypeAst::List(inner, _) => {
                let elem = self.lower_type(inner)?;
                Some(SemType::list(elem))
            }
            TypeAst::Named(name, span) => {
                if self.records.iter().any(|r| r.name == *name) {
                    Some(SemType::record(name))
                } else {
                    self.error(*span, format!("unknown type `{}`", name));
                    None
                }
            }
        }
    }

    fn record_def(&self, name: &str) -> Option<&RecordDef> {
        self.records.iter().find(|r| r.name == name)
    }

    fn zero_value(&self, ty: &SemType) -> Value {
        if ty.nullable {
            return Value::Null;
        }
        match &ty.base {
            BaseType::Int => Value::Int(0),
            BaseType::Bool => Value::Bool(false),
            BaseType::Str => Value::Str(String::new()),
            BaseType::List(_) => Value::List(Vec::new()),
            BaseType::Record(name) => {
                let mut fields = BTreeMap::new();
                if let Some(rec) = self.record_def(name) {
                    for f in rec.fields.clone() {
                        let v = f
                            .default
                            .as_ref()
                            .and_then(texpr_const_value)
                            .unwrap_or_else(|| self.zero_value(&f.ty));
                        fields.insert(f.name.clone(), v);
                    }
                }
                Value::Record(fields)
            }
            BaseType::Null | BaseType::StateSet => Value::Null,
        }
    }

    fn check_record(&mut self, rec: &ast::RecordDecl) -> RecordDef {
        // register the name before checking fields so self-shaped listings
        // fail on the field, not the record name
        let mut fields = Vec::new();
        for f in &rec.fields {
            let Some(ty) = self.lower_type(&f.ty) else {
                continue;
            };
            let nullable = matches!(f.default, Some(Expr::Null(_)));
            let ty = if nullable { ty.nullable() } else { ty };
            let default = f.default.as_ref().and_then(|expr| {
                self.const_value(expr, &ty)
                    .map(|v| value_to_texpr(&v))
            });
            if fields.iter().any(|g: &FieldDef| g.name == f.name) {
                self.error(f.span, format!("duplicate field `{}`", f.name));
                continue;
            }
            fields.push(FieldDef {
                name: f.name.clone(),
                ty,
                default,
            });
        }
        RecordDef {
            name: rec.name.clone(),
            fields,
        }
    }

    /// Evaluate a declaration default. Only literals (and record literals of
    /// literals) are constant.
    fn const_value(&mut self, expr: &Expr, expect: &SemType) -> Option<Value> {
        let v = match expr {
            Expr::Int(n, _) => Value::Int(*n),
            Expr::Str(s, _) => Value::Str(s.clone()),
            Expr::Bool(b, _) => Value::Bool(*b),
            Expr::Null(_) => Value::Null,
            Expr::Record(fields, span) => {
                let BaseType::Record(rec_name) = expect.base.clone() else {
                    self.error(*span, format!("expected `{}`, found record literal", expect));
                    return None;
                };
                let rec = self.record_def(&rec_name)?.clone();
                let mut out: BTreeMap<String, Value> = BTreeMap::new();
                for (fname, fexpr) in fields {
                    let Some(fdef) = rec.field(fname) else {
                        self.error(
                            fexpr.span(),
                            format!("record `{}` has no field `{}`", rec_name, fname),
                        );
                        return None;
                    };
                    let fty = fdef.ty.clone();
                    let v = self.const_value(fexpr, &fty)?;
                    out.insert(fname.clone(), v);
                }
                for f in &rec.fields {
                    if !out.contains_key(&f.name) {
                        let v = f
                            .default
                            .as_ref()
                            .and_then(texpr_const_value)
                            .unwrap_or_else(|| self.zero_value(&f.ty));
                        out.insert(f.name.clone(), v);
                    }
                }
                Value::Record(out)
            }
            _ => {
                self.error(
                    expr.span(),
                    "default value must be a constant".to_string(),
                );
                return None;
            }
        };
        let got = self.value_type(&v, expect);
        if !got.assignable_to(expect) {
            self.error(
                expr.span(),
                format!("type error: expected `{}`, found `{}`", expect, got),
            );
            return None;
        }
        Some(v)
    }

    fn value_type(&self, v: &Value, hint: &SemType) -> SemType {
        match v {
            Value::Int(_) => SemType::int(),
            Value::Bool(_) => SemType::bool(),
            Value::Str(_) => SemType::str(),
            Value::Null => SemType::null(),
            Value::Record(_) | Value::List(_) => SemType {
                base: hint.base.clone(),
                nullable: false,
            },
        }
    }

    fn check_func(
        &mut self,
        decl: &ast::FuncDecl,
        params: Vec<(String, SemType)>,
        ret: SemType,
    ) -> FuncDef {
        for w in &decl.body.state_writes {
            self.error(
                w.span,
                "pure function cannot modify state variables".to_string(),
            );
        }
        let mut locals = Locals::new(BodyKind::Func);
        locals.names.extend(params.iter().cloned());
        let mut lets = Vec::new();
        for binding in &decl.body.lets {
            if let Some((texpr, ty)) = self.check_expr(&binding.value, &mut locals, None) {
                locals.names.push((binding.name.clone(), ty));
                lets.push((binding.name.clone(), texpr));
            }
        }
        let body = self
            .check_expr(&decl.body.value, &mut locals, Some(&ret))
            .map(|(t, _)| t)
            .unwrap_or(TExpr::Int(0));
        FuncDef {
            name: decl.name.clone(),
            params,
            ret,
            lets,
            body,
        }
    }

    fn check_action_body(&mut self, body: &[Assign]) -> Vec<(TargetRef, TExpr)> {
        let mut out = Vec::new();
        for assign in body {
            match &assign.target {
                AssignTarget::State { path, span } => {
                    let Some((target, ty)) = self.resolve_target(path, *span) else {
                        continue;
                    };
                    let mut locals = Locals::new(BodyKind::Action);
                    if let Some((value, _)) =
                        self.check_expr(&assign.value, &mut locals, Some(&ty))
                    {
                        out.push((target, value));
                    }
                }
                AssignTarget::Name { span, .. } => {
                    self.error(
                        *span,
                        "action assignments must target state variables through `@`"
                            .to_string(),
                    );
                }
            }
        }
        out
    }

    fn check_init(&mut self, decl: &ast::InitDecl) -> InitDef {
        let mut params = Vec::new();
        for p in &decl.params {
            if let Some(ty) = self.lower_type(&p.ty) {
                params.push((p.name.clone(), ty));
            }
        }
        let mut locals = Locals::new(BodyKind::Init);
        locals.names.extend(params.iter().cloned());

        let mut state_assigns = Vec::new();
        let mut collection_assigns: Vec<CollectionInit> = Vec::new();
        for assign in &decl.body {
            match &assign.target {
                AssignTarget::State { path, span } => {
                    let Some((target, ty)) = self.resolve_target(path, *span) else {
                        continue;
                    };
                    if let Some((value, _)) =
                        self.check_expr(&assign.value, &mut locals, Some(&ty))
                    {
                        state_assigns.push((target, value));
                    }
                }
                AssignTarget::Name { name, span } => {
                    let Some(iv) = self.instance_vars.iter().find(|v| v.name == *name).cloned()
                    else {
                        self.error(
                            *span,
                            format!(
                                "only instance collections may be assigned without `@`; `{}` is not one",
                                name
                            ),
                        );
                        continue;
                    };
                    if collection_assigns.iter().any(|c| c.collection == *name) {
                        self.error(*span, format!("collection `{}` initialized twice", name));
                        continue;
                    }
                    let Expr::Call(callee, _, args, cspan) = &assign.value else {
                        self.error(
                            assign.value.span(),
                            "instance collections are initialized with `replicate(n, x::System)`"
                                .to_string(),
                        );
                        continue;
                    };
                    if callee != "replicate" || args.len() != 2 {
                        self.error(
                            *cspan,
                            "instance collections are initialized with `replicate(n, x::System)`"
                                .to_string(),
                        );
                        continue;
                    }
                    let count = self
                        .check_expr(&args[0], &mut locals, Some(&SemType::int()))
                        .map(|(t, _)| t);
                    let Expr::Template(_, system, tspan) = &args[1] else {
                        self.error(
                            args[1].span(),
                            "second argument of replicate must be an `x::System` template"
                                .to_string(),
                        );
                        continue;
                    };
                    if *system != iv.elem_system {
                        self.error(
                            *tspan,
                            format!(
                                "collection `{}` holds `{}` instances, not `{}`",
                                name, iv.elem_system, system
                            ),
                        );
                        continue;
                    }
                    if let Some(count) = count {
                        collection_assigns.push(CollectionInit {
                            collection: name.clone(),
                            count,
                            system: system.clone(),
                        });
                    }
                }
            }
        }
        InitDef {
            params,
            state_assigns,
            collection_assigns,
        }
    }

    fn resolve_target(&mut self, path: &[String], span: Span) -> Option<(TargetRef, SemType)> {
        let var = &path[0];
        let Some(svar) = self.state_vars.iter().find(|v| v.name == *var) else {
            self.error(span, format!("unknown state variable `{}`", var));
            return None;
        };
        let mut ty = svar.ty.clone();
        for field in &path[1..] {
            if ty.nullable {
                self.error(
                    span,
                    format!("cannot assign through nullable value `{}`", var),
                );
                return None;
            }
            let BaseType::Record(rec_name) = &ty.base else {
                self.error(span, format!("`{}` is not a record", ty));
                return None;
            };
            let Some(fdef) = self.record_def(rec_name).and_then(|r| r.field(field)) else {
                self.error(
                    span,
                    format!("record `{}` has no field `{}`", rec_name, field),
                );
                return None;
            };
            ty = fdef.ty.clone();
        }
        Some((
            TargetRef {
                var: var.clone(),
                fields: path[1..].to_vec(),
            },
            ty,
        ))
    }

    fn coerce(
        &mut self,
        span: Span,
        texpr: TExpr,
        got: SemType,
        expect: Option<&SemType>,
    ) -> Option<(TExpr, SemType)> {
        if let Some(exp) = expect {
            if !got.assignable_to(exp) {
                self.error(
                    span,
                    format!("type error: expected `{}`, found `{}`", exp, got),
                );
                return None;
            }
        }
        Some((texpr, got))
    }

    fn check_expr(
        &mut self,
        expr: &Expr,
        locals: &mut Locals,
        expect: Option<&SemType>,
    ) -> Option<(TExpr, SemType)> {
        let span = expr.span();
        match expr {
            Expr::Int(n, _) => self.coerce(span, TExpr::Int(*n), SemType::int(), expect),
            Expr::Str(s, _) => self.coerce(span, TExpr::Str(s.clone()), SemType::str(), expect),
            Expr::Bool(b, _) => self.coerce(span, TExpr::Bool(*b), SemType::bool(), expect),
            Expr::Null(_) => self.coerce(span, TExpr::Null, SemType::null(), expect),
            Expr::AtRef(_) => {
                if locals.kind == BodyKind::Func {
                    self.error(span, "pure functions cannot access state variables".to_string());
                    return None;
                }
                Some((
                    TExpr::ReadState(String::new()),
                    SemType {
                        base: BaseType::StateSet,
                        nullable: false,
                    },
                ))
            }
            Expr::Name(name, _) => {
                if let Some(ty) = locals.lookup(name).cloned() {
                    return self.coerce(span, TExpr::ReadLocal(name.clone()), ty, expect);
                }
                if locals.kind != BodyKind::Func {
                    if let Some(v) = self.state_vars.iter().find(|v| v.name == *name) {
                        let ty = v.ty.clone();
                        return self.coerce(span, TExpr::ReadState(name.clone()), ty, expect);
                    }
                    if locals.kind == BodyKind::Prop && self.prop_names.contains(name) {
                        return self.coerce(
                            span,
                            TExpr::PropRef(name.clone()),
                            SemType::bool(),
                            expect,
                        );
                    }
                }
                if self.instance_vars.iter().any(|v| v.name == *name) {
                    self.error(
                        span,
                        format!("instance collection `{}` cannot be used as a value here", name),
                    );
                    return None;
                }
                self.error(span, format!("unresolved name `{}`", name));
                None
            }
            Expr::Field(base, field, _) => {
                let (tbase, bty) = self.check_expr(base, locals, None)?;
                match &bty.base {
                    BaseType::StateSet => {
                        let Some(v) = self.state_vars.iter().find(|v| v.name == *field) else {
                            self.error(span, format!("unknown state variable `{}`", field));
                            return None;
                        };
                        let ty = v.ty.clone();
                        self.coerce(span, TExpr::ReadState(field.clone()), ty, expect)
                    }
                    BaseType::Record(rec_name) => {
                        if bty.nullable {
                            self.error(
                                span,
                                "field access on a nullable value; compare against null first"
                                    .to_string(),
                            );
                            return None;
                        }
                        let Some(fdef) =
                            self.record_def(rec_name).and_then(|r| r.field(field)).cloned()
                        else {
                            self.error(
                                span,
                                format!("record `{}` has no field `{}`", rec_name, field),
                            );
                            return None;
                        };
                        self.coerce(
                            span,
                            TExpr::Field(Box::new(tbase), field.clone()),
                            fdef.ty,
                            expect,
                        )
                    }
                    _ => {
                        self.error(span, format!("type `{}` has no fields", bty));
                        None
                    }
                }
            }
            Expr::Index(base, index, _) => {
                let (tbase, bty) = self.check_expr(base, locals, None)?;
                let BaseType::List(elem) = &bty.base else {
                    self.error(span, format!("type `{}` cannot be indexed", bty));
                    return None;
                };
                if bty.nullable {
                    self.error(span, "indexing a nullable list".to_string());
                    return None;
                }
                let elem_ty = (**elem).clone();
                let (tindex, _) = self.check_expr(index, locals, Some(&SemType::int()))?;
                self.coerce(
                    span,
                    TExpr::Index(Box::new(tbase), Box::new(tindex)),
                    elem_ty,
                    expect,
                )
            }
            Expr::Call(name, name_span, args, _) => {
                if name == "replicate" {
                    self.error(
                        *name_span,
                        "replicate is only valid when initializing an instance collection"
                            .to_string(),
                    );
                    return None;
                }
                let Some((param_tys, ret)) = self.func_sigs.get(name).cloned() else {
                    self.error(*name_span, format!("unresolved name `{}`", name));
                    return None;
                };
                if args.len() != param_tys.len() {
                    self.error(
                        span,
                        format!(
                            "function `{}` expects {} argument(s), found {}",
                            name,
                            param_tys.len(),
                            args.len()
                        ),
                    );
                    return None;
                }
                let mut targs = Vec::new();
                for (arg, pty) in args.iter().zip(&param_tys) {
                    let (targ, _) = self.check_expr(arg, locals, Some(pty))?;
                    targs.push(targ);
                }
                self.coerce(span, TExpr::Call(name.clone(), targs), ret, expect)
            }
            Expr::Record(_, _) => {
                let Some(exp) = expect else {
                    self.error(
                        span,
                        "record literal needs a record-typed context".to_string(),
                    );
                    return None;
                };
                let BaseType::Record(rec_name) = exp.base.clone() else {
                    self.error(span, format!("type error: expected `{}`, found record literal", exp));
                    return None;
                };
                let t = self.check_record_literal(expr, &rec_name, locals)?;
                Some((t, SemType::record(&rec_name)))
            }
            Expr::Not(inner, _) => {
                let (t, _) = self.check_expr(inner, locals, Some(&SemType::bool()))?;
                self.coerce(span, TExpr::Not(Box::new(t)), SemType::bool(), expect)
            }
            Expr::Binary(op, lhs, rhs, _) => self.check_binary(*op, lhs, rhs, span, locals, expect),
            Expr::Cast(ty, inner, _) => {
                let (tinner, ity) = self.check_expr(inner, locals, None)?;
                let target = self.lower_type(ty)?;
                if ity.nullable || ity.is_null_literal() {
                    self.error(span, "cannot cast a nullable value".to_string());
                    return None;
                }
                let kind = match (&ity.base, &target.base) {
                    (BaseType::Str, BaseType::Int) => CastKind::StrToInt,
                    (BaseType::Int, BaseType::Str) => CastKind::IntToStr,
                    (a, b) if a == b => CastKind::Identity,
                    _ => {
                        self.error(
                            span,
                            format!("unsupported cast from `{}` to `{}`", ity, target),
                        );
                        return None;
                    }
                };
                self.coerce(span, TExpr::Cast(kind, Box::new(tinner)), target, expect)
            }
            Expr::If(cond, then_e, else_e, _) => {
                let (tc, _) = self.check_expr(cond, locals, Some(&SemType::bool()))?;
                let (tt, t_ty) = self.check_expr(then_e, locals, expect)?;
                let (te, e_ty) = self.check_expr(else_e, locals, expect)?;
                let ty = self.unify_branches(span, &t_ty, &e_ty)?;
                Some((
                    TExpr::If(Box::new(tc), Box::new(tt), Box::new(te)),
                    ty,
                ))
            }
            Expr::Fold(op, arg, _) => {
                if locals.kind != BodyKind::Prop {
                    self.error(span, "fold is only valid in prop bodies".to_string());
                    return None;
                }
                let Expr::Field(base, prop, _) = &**arg else {
                    self.error(
                        span,
                        "fold expects `collection.Prop` as its argument".to_string(),
                    );
                    return None;
                };
                let Expr::Name(coll, cspan) = &**base else {
                    self.error(
                        span,
                        "fold expects `collection.Prop` as its argument".to_string(),
                    );
                    return None;
                };
                let Some(iv) = self.instance_vars.iter().find(|v| v.name == *coll).cloned()
                else {
                    self.error(*cspan, format!("unknown instance collection `{}`", coll));
                    return None;
                };
                let elem = self.ctx.get(&iv.elem_system);
                if elem.map_or(true, |e| e.prop(prop).is_none()) {
                    self.error(
                        span,
                        format!("system `{}` has no prop `{}`", iv.elem_system, prop),
                    );
                    return None;
                }
                self.coerce(
                    span,
                    TExpr::FoldProp(*op, coll.clone(), prop.clone()),
                    SemType::bool(),
                    expect,
                )
            }
            Expr::Template(_, _, _) => {
                self.error(
                    span,
                    "instance templates are only valid inside replicate".to_string(),
                );
                None
            }
        }
    }

    fn check_binary(
        &mut self,
        op: BinOp,
        lhs: &Expr,
        rhs: &Expr,
        span: Span,
        locals: &mut Locals,
        expect: Option<&SemType>,
    ) -> Option<(TExpr, SemType)> {
        match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                let (tl, lty) = self.check_expr(lhs, locals, None)?;
                let (tr, rty) = self.check_expr(rhs, locals, None)?;
                for ty in [&lty, &rty] {
                    if ty.base != BaseType::Int || ty.nullable {
                        self.error(
                            span,
                            format!(
                                "type error: expected `int`, found `{}` in arithmetic",
                                ty
                            ),
                        );
                        return None;
                    }
                }
                self.coerce(
                    span,
                    TExpr::Binary(op, Box::new(tl), Box::new(tr)),
                    SemType::int(),
                    expect,
                )
            }
            BinOp::Eq | BinOp::Neq => {
                let (tl, lty) = self.check_expr(lhs, locals, None)?;
                let (tr, rty) = self.check_expr(rhs, locals, None)?;
                let ok = if lty.is_null_literal() {
                    rty.nullable || rty.is_null_literal()
                } else if rty.is_null_literal() {
                    lty.nullable
                } else {
                    lty.same_base(&rty) && lty.base != BaseType::StateSet
                };
                if !ok {
                    self.error(
                        span,
                        format!("type error: cannot compare `{}` with `{}`", lty, rty),
                    );
                    return None;
                }
                self.coerce(
                    span,
                    TExpr::Binary(op, Box::new(tl), Box::new(tr)),
                    SemType::bool(),
                    expect,
                )
            }
            BinOp::And | BinOp::Or | BinOp::Implies => {
                let (tl, _) = self.check_expr(lhs, locals, Some(&SemType::bool()))?;
                let (tr, _) = self.check_expr(rhs, locals, Some(&SemType::bool()))?;
                self.coerce(
                    span,
                    TExpr::Binary(op, Box::new(tl), Box::new(tr)),
                    SemType::bool(),
                    expect,
                )
            }
        }
    }

    fn unify_branches(&mut self, span: Span, a: &SemType, b: &SemType) -> Option<SemType> {
        if a.is_null_literal() && b.is_null_literal() {
            return Some(SemType::null());
        }
        if a.is_null_literal() {
            return Some(b.clone().nullable());
        }
        if b.is_null_literal() {
            return Some(a.clone().nullable());
        }
        if a.same_base(b) {
            let mut ty = a.clone();
            ty.nullable = a.nullable || b.nullable;
            return Some(ty);
        }
        self.error(
            span,
            format!("if branches have different types: `{}` and `{}`", a, b),
        );
        None
    }

    fn check_record_literal(
        &mut self,
        expr: &Expr,
        rec_name: &str,
        locals: &mut Locals,
    ) -> Option<TExpr> {
        let Expr::Record(fields, span) = expr else {
            unreachable!("caller matched record literal");
        };
        let Some(rec) = self.record_def(rec_name).cloned() else {
            self.error(*span, format!("unknown record `{}`", rec_name));
            return None;
        };
        let mut seen: BTreeMap<String, TExpr> = BTreeMap::new();
        for (fname, fexpr) in fields {
            let Some(fdef) = rec.field(fname) else {
                self.error(
                    fexpr.span(),
                    format!("record `{}` has no field `{}`", rec_name, fname),
                );
                return None;
            };
            if seen.contains_key(fname) {
                self.error(fexpr.span(), format!("duplicate field `{}`", fname));
                return None;
            }
            let fty = fdef.ty.clone();
            let (t, _) = self.check_expr(fexpr, locals, Some(&fty))?;
            seen.insert(fname.clone(), t);
        }
        let mut out = Vec::new();
        for f in &rec.fields {
            match seen.remove(&f.name) {
                Some(t) => out.push((f.name.clone(), t)),
                None => match &f.default {
                    Some(d) => out.push((f.name.clone(), d.clone())),
                    None => {
                        self.error(
                            *span,
                            format!("missing field `{}` without a default", f.name),
                        );
                        return None;
                    }
                },
            }
        }
        Some(TExpr::Record(rec_name.to_string(), out))
    }

    fn check_spec_atoms(&mut self, spec: &SpecExpr) {
        match spec {
            SpecExpr::Atom(name, span) => {
                let known = self.spec_names.contains(name)
                    || self.action_names.contains(name)
                    || self.instance_vars.iter().any(|v| v.name == *name);
                if !known {
                    self.error(
                        *span,
                        format!("unresolved name `{}` in spec expression", name),
                    );
                }
            }
            SpecExpr::Seq(a, b, _) | SpecExpr::Choice(a, b, _) | SpecExpr::Par(a, b, _) => {
                self.check_spec_atoms(a);
                self.check_spec_atoms(b);
            }
            SpecExpr::Always(e, _) => self.check_spec_atoms(e),
            SpecExpr::FoldPar(coll, span) => {
                let Some(iv) = self.instance_vars.iter().find(|v| v.name == *coll) else {
                    self.error(*span, format!("unknown instance collection `{}`", coll));
                    return;
                };
                let elem = iv.elem_system.clone();
                if self.ctx.get(&elem).map_or(true, |e| !e.has_main()) {
                    self.error(
                        *span,
                        format!("system `{}` has no Main spec to compose", elem),
                    );
                }
            }
        }
    }

    fn check_prop_cycles(&mut self, props: &[PropDef], ast: &SystemAst) {
        fn refs(expr: &TExpr, out: &mut BTreeSet<String>) {
            match expr {
                TExpr::PropRef(name) => {
                    out.insert(name.clone());
                }
                TExpr::Field(e, _) | TExpr::Not(e) | TExpr::Cast(_, e) => refs(e, out),
                TExpr::Index(a, b) | TExpr::Binary(_, a, b) => {
                    refs(a, out);
                    refs(b, out);
                }
                TExpr::Call(_, args) => {
                    for a in args {
                        refs(a, out);
                    }
                }
                TExpr::Record(_, fields) => {
                    for (_, e) in fields {
                        refs(e, out);
                    }
                }
                TExpr::If(c, t, e) => {
                    refs(c, out);
                    refs(t, out);
                    refs(e, out);
                }
                _ => {}
            }
        }

        let graph: BTreeMap<&str, BTreeSet<String>> = props
            .iter()
            .map(|p| {
                let mut out = BTreeSet::new();
                refs(&p.body, &mut out);
                (p.name.as_str(), out)
            })
            .collect();

        // DFS from each own prop
        for p in props.iter().filter(|p| p.own) {
            let mut stack = alloc::vec![p.name.clone()];
            let mut visited = BTreeSet::new();
            let mut on_path = BTreeSet::new();
            fn dfs(
                name: &str,
                graph: &BTreeMap<&str, BTreeSet<String>>,
                visited: &mut BTreeSet<String>,
                on_path: &mut BTreeSet<String>,
            ) -> bool {
                if on_path.contains(name) {
                    return true;
                }
                if !visited.insert(name.to_string()) {
                    return false;
                }
                on_path.insert(name.to_string());
                if let Some(next) = graph.get(name) {
                    for n in next {
                        if dfs(n, graph, visited, on_path) {
                            return true;
                        }
                    }
                }
                on_path.remove(name);
                false
            }
            if dfs(&p.name, &graph, &mut visited, &mut on_path) {
                let span = ast
                    .props
                    .iter()
                    .find(|q| q.name == p.name)
                    .map_or(ast.name_span, |q| q.name_span);
                self.error(span, format!("prop `{}` is recursively defined", p.name));
                stack.clear();
            }
        }
    }

    fn pformula(&mut self, expr: &Expr) -> Option<PFormula> {
        match expr {
            Expr::Bool(true, _) => Some(PFormula::True),
            Expr::Bool(false, _) => Some(PFormula::False),
            Expr::Name(name, span) => {
                if self.prop_names.contains(name) {
                    Some(PFormula::Ref(name.clone()))
                } else {
                    self.error(*span, format!("unknown proposition `{}`", name));
                    None
                }
            }
            Expr::Not(inner, _) => Some(PFormula::Not(Box::new(self.pformula(inner)?))),
            Expr::Binary(BinOp::And, a, b, _) => Some(PFormula::And(
                Box::new(self.pformula(a)?),
                Box::new(self.pformula(b)?),
            )),
            Expr::Binary(BinOp::Or, a, b, _) => Some(PFormula::Or(
                Box::new(self.pformula(a)?),
                Box::new(self.pformula(b)?),
            )),
            Expr::Binary(BinOp::Implies, a, b, _) => Some(PFormula::Implies(
                Box::new(self.pformula(a)?),
                Box::new(self.pformula(b)?),
            )),
            _ => {
                self.error(
                    expr.span(),
                    "static property formulas may only use propositions and boolean connectives"
                        .to_string(),
                );
                None
            }
        }
    }
}

fn texpr_const_value(expr: &TExpr) -> Option<Value> {
    match expr {
        TExpr::Int(n) => Some(Value::Int(*n)),
        TExpr::Str(s) => Some(Value::Str(s.clone())),
        TExpr::Bool(b) => Some(Value::Bool(*b)),
        TExpr::Null => Some(Value::Null),
        TExpr::Record(_, fields) => {
            let mut out = BTreeMap::new();
            for (name, e) in fields {
                out.insert(name.clone(), texpr_const_value(e)?);
            }
            Some(Value::Record(out))
        }
        _ => None,
    }
}

fn value_to_texpr(v: &Value) -> TExpr {
    match v {
        Value::Int(n) => TExpr::Int(*n),
        Value::Bool(b) => TExpr::Bool(*b),
        Value::Str(s) => TExpr::Str(s.clone()),
        Value::Null => TExpr::Null,
        Value::Record(fields) => TExpr::Record(
            String::new(),
            fields
                .iter()
                .map(|(k, v)| (k.clone(), value_to_texpr(v)))
                .collect(),
        ),
        Value::List(_) => TExpr::Null,
    }
}
