//! Free variables, capture-avoiding substitution and α-equivalence.
//!
//! Substitution is simultaneous over type and term variables. Binders are
//! renamed only when they would capture a free variable of the range, so
//! substituting closed values (the only case at run time) never renames.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::ast::*;

pub type NameSet = BTreeSet<Name>;

/// The smallest `base<k>` (k ≥ 1) not rejected by `taken`.
pub fn fresh(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|c| !taken(c))
        .map(|s| name(&s))
        .expect("unbounded search")
}

// ---------------------------------------------------------------------------
// free type variables

pub fn ftv_type(t: &Type, out: &mut NameSet) {
    match t {
        Type::Var(x) => {
            out.insert(x.clone());
        }
        Type::Obj(o) => ftv_obj_type(o, out),
    }
}

pub fn ftv_obj_type(o: &ObjType, out: &mut NameSet) {
    for p in &o.parents {
        ftv_nominal(p, out);
    }
    for e in o.sig.values() {
        ftv_mt(&e.mt, out);
    }
}

pub fn ftv_nominal(n: &NominalType, out: &mut NameSet) {
    for a in &n.args {
        ftv_type(a, out);
    }
}

pub fn ftv_effect(e: &Effect, out: &mut NameSet) {
    match e {
        Effect::Empty | Effect::Top => {}
        Effect::Union(a, b) => {
            ftv_effect(a, out);
            ftv_effect(b, out);
        }
        Effect::Call(a) => {
            ftv_type(&a.recv, out);
            for t in &a.targs {
                ftv_type(t, out);
            }
        }
    }
}

/// Free type variables of a method type, excluding its own binders.
pub fn ftv_mt(mt: &MethodTypeEffect, out: &mut NameSet) {
    let mut inner = NameSet::new();
    ftv_mt_open(mt, &mut inner);
    for (x, _) in &mt.type_params {
        inner.remove(x);
    }
    out.extend(inner);
}

/// Free type variables of the parts of `mt` under its binders, binders included.
fn ftv_mt_open(mt: &MethodTypeEffect, out: &mut NameSet) {
    for (_, b) in &mt.type_params {
        ftv_type(b, out);
    }
    for p in &mt.param_types {
        ftv_type(p, out);
    }
    ftv_type(&mt.ret, out);
    ftv_effect(&mt.effect, out);
}

pub fn ftv_value(v: &Value, out: &mut NameSet) {
    match v {
        Value::Var(_) => {}
        Value::Obj(o) => {
            if o.is_closed() {
                return;
            }
            for p in &o.parents {
                ftv_nominal(p, out);
            }
            for d in o.methods.values() {
                ftv_method(d, out);
            }
        }
    }
}

fn ftv_method(d: &MethodDecl, out: &mut NameSet) {
    let mut inner = NameSet::new();
    ftv_mt_open(&d.mt, &mut inner);
    if let Some(b) = &d.body {
        ftv_expr(&b.expr, &mut inner);
    }
    for (x, _) in &d.mt.type_params {
        inner.remove(x);
    }
    out.extend(inner);
}

pub fn ftv_expr(e: &Expr, out: &mut NameSet) {
    match e {
        Expr::Call(c) => {
            ftv_value(&c.recv, out);
            for t in &c.targs {
                ftv_type(t, out);
            }
            for a in &c.args {
                ftv_value(a, out);
            }
        }
        Expr::Return(v) => ftv_value(v, out),
        Expr::Do(_, a, b) => {
            ftv_expr(a, out);
            ftv_expr(b, out);
        }
        Expr::Try(b, h) => {
            ftv_expr(b, out);
            for c in &h.clauses {
                ftv_nominal(&c.ntype, out);
                let mut inner = NameSet::new();
                ftv_expr(&c.body, &mut inner);
                for x in &c.type_params {
                    inner.remove(x);
                }
                out.extend(inner);
            }
            ftv_expr(&h.final_expr, out);
        }
    }
}

// ---------------------------------------------------------------------------
// free term variables

pub fn fv_value(v: &Value, out: &mut NameSet) {
    match v {
        Value::Var(x) => {
            out.insert(x.clone());
        }
        Value::Obj(o) => {
            if o.is_closed() {
                return;
            }
            for d in o.methods.values() {
                if let Some(b) = &d.body {
                    let mut inner = NameSet::new();
                    fv_expr(&b.expr, &mut inner);
                    inner.remove(&b.self_var);
                    for p in &b.params {
                        inner.remove(p);
                    }
                    out.extend(inner);
                }
            }
        }
    }
}

pub fn fv_expr(e: &Expr, out: &mut NameSet) {
    match e {
        Expr::Call(c) => {
            fv_value(&c.recv, out);
            for a in &c.args {
                fv_value(a, out);
            }
        }
        Expr::Return(v) => fv_value(v, out),
        Expr::Do(x, a, b) => {
            fv_expr(a, out);
            let mut inner = NameSet::new();
            fv_expr(b, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
        Expr::Try(b, h) => {
            fv_expr(b, out);
            for c in &h.clauses {
                let mut inner = NameSet::new();
                fv_expr(&c.body, &mut inner);
                inner.remove(&c.self_var);
                for p in &c.params {
                    inner.remove(p);
                }
                out.extend(inner);
            }
            let mut inner = NameSet::new();
            fv_expr(&h.final_expr, &mut inner);
            inner.remove(&h.final_var);
            out.extend(inner);
        }
    }
}

pub fn free_vars(e: &Expr) -> NameSet {
    let mut s = NameSet::new();
    fv_expr(e, &mut s);
    s
}

pub fn free_type_vars_expr(e: &Expr) -> NameSet {
    let mut s = NameSet::new();
    ftv_expr(e, &mut s);
    s
}

pub fn free_type_vars(t: &Type) -> NameSet {
    let mut s = NameSet::new();
    ftv_type(t, &mut s);
    s
}

pub(crate) fn obj_is_closed(o: &Obj) -> bool {
    let mut tv = NameSet::new();
    for p in &o.parents {
        ftv_nominal(p, &mut tv);
    }
    for d in o.methods.values() {
        ftv_method(d, &mut tv);
    }
    if !tv.is_empty() {
        return false;
    }
    let mut v = NameSet::new();
    for d in o.methods.values() {
        if let Some(b) = &d.body {
            let mut inner = NameSet::new();
            fv_expr(&b.expr, &mut inner);
            inner.remove(&b.self_var);
            for p in &b.params {
                inner.remove(p);
            }
            v.extend(inner);
        }
    }
    v.is_empty()
}

// ---------------------------------------------------------------------------
// substitution

/// A simultaneous substitution `[T̄/X̄][v̄/x̄]`.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    types: BTreeMap<Name, Type>,
    values: BTreeMap<Name, Value>,
    range_ftv: NameSet,
    range_fv: NameSet,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, Type)>>(pairs: I) -> Self {
        let mut s = Subst::new();
        for (x, t) in pairs {
            s.add_type(x, t);
        }
        s
    }

    pub fn add_type(&mut self, x: Name, t: Type) {
        ftv_type(&t, &mut self.range_ftv);
        self.types.insert(x, t);
    }

    pub fn add_value(&mut self, x: Name, v: Value) {
        ftv_value(&v, &mut self.range_ftv);
        fv_value(&v, &mut self.range_fv);
        self.values.insert(x, v);
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty() && self.values.is_empty()
    }

    fn touches_types(&self) -> bool {
        !self.types.is_empty()
    }

    /// Enter the scope of type binders `xs`, renaming those that would capture.
    fn bind_types(&self, xs: &[Name], body_ftv: impl FnOnce() -> NameSet) -> (Subst, Vec<Name>) {
        let mut inner = self.clone();
        for x in xs {
            inner.types.remove(x);
        }
        if !xs.iter().any(|x| self.range_ftv.contains(x)) {
            return (inner, xs.to_vec());
        }
        let mut avoid: NameSet = self.range_ftv.clone();
        avoid.extend(body_ftv());
        avoid.extend(self.types.keys().cloned());
        avoid.extend(xs.iter().cloned());
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            if self.range_ftv.contains(x) {
                let nx = fresh(x, |c| avoid.contains(c));
                avoid.insert(nx.clone());
                inner.add_type(x.clone(), Type::Var(nx.clone()));
                out.push(nx);
            } else {
                out.push(x.clone());
            }
        }
        (inner, out)
    }

    fn bind_terms(&self, xs: &[Name], body_fv: impl FnOnce() -> NameSet) -> (Subst, Vec<Name>) {
        let mut inner = self.clone();
        for x in xs {
            inner.values.remove(x);
        }
        if !xs.iter().any(|x| self.range_fv.contains(x)) {
            return (inner, xs.to_vec());
        }
        let mut avoid: NameSet = self.range_fv.clone();
        avoid.extend(body_fv());
        avoid.extend(self.values.keys().cloned());
        avoid.extend(xs.iter().cloned());
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            if self.range_fv.contains(x) {
                let nx = fresh(x, |c| avoid.contains(c));
                avoid.insert(nx.clone());
                inner.add_value(x.clone(), Value::Var(nx.clone()));
                out.push(nx);
            } else {
                out.push(x.clone());
            }
        }
        (inner, out)
    }

    pub fn ty(&self, t: &Type) -> Type {
        if !self.touches_types() {
            return t.clone();
        }
        match t {
            Type::Var(x) => self.types.get(x).cloned().unwrap_or_else(|| t.clone()),
            Type::Obj(o) => Type::Obj(self.obj_type(o)),
        }
    }

    pub fn obj_type(&self, o: &ObjType) -> ObjType {
        ObjType {
            parents: o.parents.iter().map(|p| self.nominal(p)).collect(),
            sig: o
                .sig
                .iter()
                .map(|(m, e)| (m.clone(), SigEntry { kind: e.kind, mt: self.mt(&e.mt) }))
                .collect(),
        }
    }

    pub fn nominal(&self, n: &NominalType) -> NominalType {
        NominalType { name: n.name.clone(), args: n.args.iter().map(|a| self.ty(a)).collect() }
    }

    /// Kept for readability at call sites that only substitute types.
    pub fn apply_nominal(&self, n: &NominalType) -> NominalType {
        self.nominal(n)
    }

    pub fn effect(&self, e: &Effect) -> Effect {
        if !self.touches_types() {
            return e.clone();
        }
        match e {
            Effect::Empty | Effect::Top => e.clone(),
            Effect::Union(a, b) => Effect::union(self.effect(a), self.effect(b)),
            Effect::Call(a) => Effect::Call(self.atom(a)),
        }
    }

    pub fn atom(&self, a: &CallAtom) -> CallAtom {
        CallAtom {
            recv: self.ty(&a.recv),
            method: a.method.clone(),
            targs: a.targs.iter().map(|t| self.ty(t)).collect(),
        }
    }

    pub fn mt(&self, mt: &MethodTypeEffect) -> MethodTypeEffect {
        self.mt_scoped(mt, NameSet::new).1
    }

    /// Substitute under the binders of `mt`; also returns the inner
    /// substitution so a method body in the same scope can reuse it.
    fn mt_scoped(&self, mt: &MethodTypeEffect, extra_ftv: impl FnOnce() -> NameSet) -> (Subst, MethodTypeEffect) {
        let binders: Vec<Name> = mt.type_params.iter().map(|(x, _)| x.clone()).collect();
        let (inner, names) = self.bind_types(&binders, || {
            let mut s = extra_ftv();
            ftv_mt_open(mt, &mut s);
            s
        });
        let out = MethodTypeEffect {
            type_params: names
                .into_iter()
                .zip(&mt.type_params)
                .map(|(x, (_, b))| (x, inner.ty(b)))
                .collect(),
            param_types: mt.param_types.iter().map(|t| inner.ty(t)).collect(),
            ret: inner.ty(&mt.ret),
            effect: inner.effect(&mt.effect),
        };
        (inner, out)
    }

    pub fn value(&self, v: &Value) -> Value {
        match v {
            Value::Var(x) => self.values.get(x).cloned().unwrap_or_else(|| v.clone()),
            Value::Obj(o) => {
                if o.is_closed() || self.is_empty() {
                    return v.clone();
                }
                Value::Obj(Arc::new(self.obj(o)))
            }
        }
    }

    fn obj(&self, o: &Obj) -> Obj {
        let parents = o.parents.iter().map(|p| self.nominal(p)).collect();
        let methods = o.methods.iter().map(|(m, d)| (m.clone(), self.method(d))).collect();
        Obj::new(parents, methods)
    }

    pub fn method(&self, d: &MethodDecl) -> MethodDecl {
        let (inner, mt) = self.mt_scoped(&d.mt, || {
            d.body.as_ref().map(|b| free_type_vars_expr(&b.expr)).unwrap_or_default()
        });
        let body = d.body.as_ref().map(|b| {
            let mut binders = vec![b.self_var.clone()];
            binders.extend(b.params.iter().cloned());
            let (inner2, names) = inner.bind_terms(&binders, || free_vars(&b.expr));
            Body {
                self_var: names[0].clone(),
                params: names[1..].to_vec(),
                expr: inner2.expr(&b.expr),
            }
        });
        MethodDecl { kind: d.kind, mt, body }
    }

    pub fn expr(&self, e: &Expr) -> Expr {
        if self.is_empty() {
            return e.clone();
        }
        match e {
            Expr::Call(c) => Expr::Call(Call {
                recv: self.value(&c.recv),
                method: c.method.clone(),
                targs: c.targs.iter().map(|t| self.ty(t)).collect(),
                args: c.args.iter().map(|a| self.value(a)).collect(),
            }),
            Expr::Return(v) => Expr::Return(self.value(v)),
            Expr::Do(x, a, b) => {
                let a2 = self.expr(a);
                let (inner, xs) = self.bind_terms(std::slice::from_ref(x), || free_vars(b));
                Expr::Do(xs[0].clone(), Box::new(a2), Box::new(inner.expr(b)))
            }
            Expr::Try(b, h) => Expr::Try(Box::new(self.expr(b)), self.handler(h)),
        }
    }

    pub fn handler(&self, h: &Handler) -> Handler {
        let clauses = h.clauses.iter().map(|c| self.clause(c)).collect();
        let (inner, xs) =
            self.bind_terms(std::slice::from_ref(&h.final_var), || free_vars(&h.final_expr));
        Handler {
            clauses,
            final_var: xs[0].clone(),
            final_expr: Box::new(inner.expr(&h.final_expr)),
        }
    }

    fn clause(&self, c: &Clause) -> Clause {
        let ntype = self.nominal(&c.ntype);
        let (inner, tps) = self.bind_types(&c.type_params, || free_type_vars_expr(&c.body));
        let mut binders = vec![c.self_var.clone()];
        binders.extend(c.params.iter().cloned());
        let (inner2, names) = inner.bind_terms(&binders, || free_vars(&c.body));
        Clause {
            ntype,
            method: c.method.clone(),
            type_params: tps,
            self_var: names[0].clone(),
            params: names[1..].to_vec(),
            body: inner2.expr(&c.body),
            mode: c.mode,
        }
    }
}

// ---------------------------------------------------------------------------
// α-equivalence via de Bruijn-level canonical names

#[derive(Default)]
struct Canon {
    tvars: Vec<(Name, Name)>,
    vars: Vec<(Name, Name)>,
    /// Leave closed objects as they are; used for hashing, where they
    /// contribute their memoized α-hash.
    shallow: bool,
}

impl Canon {
    fn push_t(&mut self, x: &Name) -> Name {
        let n = name(&format!("#T{}", self.tvars.len()));
        self.tvars.push((x.clone(), n.clone()));
        n
    }

    fn push_v(&mut self, x: &Name) -> Name {
        let n = name(&format!("#v{}", self.vars.len()));
        self.vars.push((x.clone(), n.clone()));
        n
    }

    fn look_t(&self, x: &Name) -> Name {
        self.tvars.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone()).unwrap_or_else(|| x.clone())
    }

    fn look_v(&self, x: &Name) -> Name {
        self.vars.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone()).unwrap_or_else(|| x.clone())
    }

    fn ty(&mut self, t: &Type) -> Type {
        match t {
            Type::Var(x) => Type::Var(self.look_t(x)),
            Type::Obj(o) => Type::Obj(ObjType {
                parents: o.parents.iter().map(|p| self.nominal(p)).collect(),
                sig: o
                    .sig
                    .iter()
                    .map(|(m, e)| (m.clone(), SigEntry { kind: e.kind, mt: self.mt(&e.mt, None).0 }))
                    .collect(),
            }),
        }
    }

    fn nominal(&mut self, n: &NominalType) -> NominalType {
        NominalType { name: n.name.clone(), args: n.args.iter().map(|a| self.ty(a)).collect() }
    }

    fn effect(&mut self, e: &Effect) -> Effect {
        match e {
            Effect::Empty | Effect::Top => e.clone(),
            Effect::Union(a, b) => Effect::union(self.effect(a), self.effect(b)),
            Effect::Call(a) => Effect::Call(CallAtom {
                recv: self.ty(&a.recv),
                method: a.method.clone(),
                targs: a.targs.iter().map(|t| self.ty(t)).collect(),
            }),
        }
    }

    fn mt(&mut self, mt: &MethodTypeEffect, body: Option<&Body>) -> (MethodTypeEffect, Option<Body>) {
        let mark = self.tvars.len();
        let names: Vec<Name> = mt.type_params.iter().map(|(x, _)| self.push_t(x)).collect();
        let out = MethodTypeEffect {
            type_params: names.into_iter().zip(&mt.type_params).map(|(n, (_, b))| (n, self.ty(b))).collect(),
            param_types: mt.param_types.iter().map(|t| self.ty(t)).collect(),
            ret: self.ty(&mt.ret),
            effect: self.effect(&mt.effect),
        };
        let body = body.map(|b| {
            let vmark = self.vars.len();
            let s = self.push_v(&b.self_var);
            let ps = b.params.iter().map(|p| self.push_v(p)).collect();
            let e = self.expr(&b.expr);
            self.vars.truncate(vmark);
            Body { self_var: s, params: ps, expr: e }
        });
        self.tvars.truncate(mark);
        (out, body)
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var(x) => Value::Var(self.look_v(x)),
            Value::Obj(o) if self.shallow && o.is_closed() => v.clone(),
            Value::Obj(o) => {
                let (parents, methods) = self.obj_parts(o);
                Value::obj(parents, methods)
            }
        }
    }

    fn obj_parts(&mut self, o: &Obj) -> (BTreeSet<NominalType>, BTreeMap<Name, MethodDecl>) {
        let parents = o.parents.iter().map(|p| self.nominal(p)).collect();
        let methods = o
            .methods
            .iter()
            .map(|(m, d)| {
                let (mt, body) = self.mt(&d.mt, d.body.as_ref());
                (m.clone(), MethodDecl { kind: d.kind, mt, body })
            })
            .collect();
        (parents, methods)
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Call(c) => Expr::Call(Call {
                recv: self.value(&c.recv),
                method: c.method.clone(),
                targs: c.targs.iter().map(|t| self.ty(t)).collect(),
                args: c.args.iter().map(|a| self.value(a)).collect(),
            }),
            Expr::Return(v) => Expr::Return(self.value(v)),
            Expr::Do(x, a, b) => {
                let a2 = self.expr(a);
                let mark = self.vars.len();
                let x2 = self.push_v(x);
                let b2 = self.expr(b);
                self.vars.truncate(mark);
                Expr::Do(x2, Box::new(a2), Box::new(b2))
            }
            Expr::Try(b, h) => {
                let b2 = self.expr(b);
                let clauses = h
                    .clauses
                    .iter()
                    .map(|c| {
                        let ntype = self.nominal(&c.ntype);
                        let tmark = self.tvars.len();
                        let vmark = self.vars.len();
                        let tps = c.type_params.iter().map(|x| self.push_t(x)).collect();
                        let s = self.push_v(&c.self_var);
                        let ps = c.params.iter().map(|p| self.push_v(p)).collect();
                        let body = self.expr(&c.body);
                        self.tvars.truncate(tmark);
                        self.vars.truncate(vmark);
                        Clause {
                            ntype,
                            method: c.method.clone(),
                            type_params: tps,
                            self_var: s,
                            params: ps,
                            body,
                            mode: c.mode,
                        }
                    })
                    .collect();
                let mark = self.vars.len();
                let fv = self.push_v(&h.final_var);
                let fe = self.expr(&h.final_expr);
                self.vars.truncate(mark);
                Expr::Try(Box::new(b2), Handler { clauses, final_var: fv, final_expr: Box::new(fe) })
            }
        }
    }
}

pub fn canon_type(t: &Type) -> Type {
    Canon::default().ty(t)
}

pub fn canon_mt(mt: &MethodTypeEffect) -> MethodTypeEffect {
    Canon::default().mt(mt, None).0
}

pub fn canon_value(v: &Value) -> Value {
    Canon::default().value(v)
}

pub fn canon_expr(e: &Expr) -> Expr {
    Canon::default().expr(e)
}

pub fn canon_effect(e: &Effect) -> Effect {
    Canon::default().effect(e)
}

fn hash_of(x: &impl std::hash::Hash) -> u64 {
    use std::hash::Hasher;
    let mut h = std::collections::hash_map::DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

pub(crate) fn alpha_hash_closed(o: &Obj) -> u64 {
    // Only the object itself is expanded; closed children contribute their
    // own precomputed hash.
    hash_of(&Canon { shallow: true, ..Canon::default() }.obj_parts(o))
}

/// Hash of the canonical form; free of cost for closed objects.
pub fn alpha_hash_value(v: &Value) -> u64 {
    match v {
        Value::Obj(o) if o.is_closed() => o.alpha_hash(),
        _ => hash_of(&Canon { shallow: true, ..Canon::default() }.value(v)),
    }
}

pub fn alpha_hash_expr(e: &Expr) -> u64 {
    hash_of(&Canon { shallow: true, ..Canon::default() }.expr(e))
}

/// A term ordered up to α-equivalence. The hash decides most comparisons;
/// canonical forms are only built on hash collisions.
#[derive(Clone, Debug)]
pub struct AlphaKey<T> {
    hash: u64,
    term: T,
}

pub trait AlphaTerm: Clone {
    fn alpha_hash(&self) -> u64;
    fn canonical(&self) -> Self;
}

impl AlphaTerm for Value {
    fn alpha_hash(&self) -> u64 {
        alpha_hash_value(self)
    }
    fn canonical(&self) -> Self {
        canon_value(self)
    }
}

impl AlphaTerm for Expr {
    fn alpha_hash(&self) -> u64 {
        alpha_hash_expr(self)
    }
    fn canonical(&self) -> Self {
        canon_expr(self)
    }
}

impl<T: AlphaTerm> AlphaKey<T> {
    pub fn new(term: &T) -> Self {
        AlphaKey { hash: term.alpha_hash(), term: term.clone() }
    }

    pub fn term(&self) -> &T {
        &self.term
    }
}

impl<T: AlphaTerm + Ord> Ord for AlphaKey<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.hash.cmp(&other.hash).then_with(|| {
            if self.term == other.term {
                std::cmp::Ordering::Equal
            } else {
                self.term.canonical().cmp(&other.term.canonical())
            }
        })
    }
}

impl<T: AlphaTerm + Ord> PartialOrd for AlphaKey<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: AlphaTerm + Ord> PartialEq for AlphaKey<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl<T: AlphaTerm + Ord> Eq for AlphaKey<T> {}

pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    a == b || canon_type(a) == canon_type(b)
}

pub fn alpha_eq_mt(a: &MethodTypeEffect, b: &MethodTypeEffect) -> bool {
    a == b || canon_mt(a) == canon_mt(b)
}

pub fn alpha_eq_value(a: &Value, b: &Value) -> bool {
    a == b || canon_value(a) == canon_value(b)
}

pub fn alpha_eq_expr(a: &Expr, b: &Expr) -> bool {
    a == b || canon_expr(a) == canon_expr(b)
}
