//! Abstract syntax of the calculus.
//!
//! Expressions are fine-grain: every call receiver and argument is a value,
//! and sequencing is explicit through `do`. Objects are anonymous classes
//! that name their nominal parents and carry their own method bodies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Interned-ish identifier. Cheap to clone and thread-safe.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// The root of the nominal hierarchy. Never declared by programs.
pub const OBJECT: &str = "Object";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MethodKind {
    Abs,
    Def,
    Mgc,
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Abs => "abs",
            MethodKind::Def => "def",
            MethodKind::Mgc => "mgc",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NominalType {
    pub name: Name,
    pub args: Vec<Type>,
}

impl NominalType {
    pub fn new(name: Name, args: Vec<Type>) -> Self {
        NominalType { name, args }
    }

    pub fn plain(n: &str) -> Self {
        NominalType { name: self::name(n), args: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Var(Name),
    Obj(ObjType),
}

/// `N̄{s}`: an intersection of nominal parents refined by a structural signature.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjType {
    pub parents: BTreeSet<NominalType>,
    pub sig: Signature,
}

pub type Signature = BTreeMap<Name, SigEntry>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SigEntry {
    pub kind: MethodKind,
    pub mt: MethodTypeEffect,
}

/// `[X̄ <: Ū] T̄ -> T ! φ`. Type parameters bind in everything after them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodTypeEffect {
    pub type_params: Vec<(Name, Type)>,
    pub param_types: Vec<Type>,
    pub ret: Type,
    pub effect: Effect,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Effect {
    Empty,
    Top,
    Union(Box<Effect>, Box<Effect>),
    Call(CallAtom),
}

/// `T.m[T̄]`: the effect of calling `m` on a receiver of type `T`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallAtom {
    pub recv: Type,
    pub method: Name,
    pub targs: Vec<Type>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Var(Name),
    Obj(Arc<Obj>),
}

/// An object literal. `closed` caches whether the object has no free term
/// or type variables, which lets substitution share it untouched.
/// `alpha_hash` is the hash of the canonical form of a closed object,
/// computed on construction; it takes no part in comparisons.
#[derive(Clone, Debug)]
pub struct Obj {
    pub parents: BTreeSet<NominalType>,
    pub methods: BTreeMap<Name, MethodDecl>,
    closed: bool,
    alpha_hash: u64,
}

impl Obj {
    pub fn new(parents: BTreeSet<NominalType>, methods: BTreeMap<Name, MethodDecl>) -> Self {
        let mut o = Obj { parents, methods, closed: false, alpha_hash: 0 };
        o.closed = crate::subst::obj_is_closed(&o);
        if o.closed {
            o.alpha_hash = crate::subst::alpha_hash_closed(&o);
        }
        o
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Meaningful only for closed objects.
    pub(crate) fn alpha_hash(&self) -> u64 {
        self.alpha_hash
    }
}

impl PartialEq for Obj {
    fn eq(&self, other: &Self) -> bool {
        self.parents == other.parents && self.methods == other.methods
    }
}

impl Eq for Obj {}

impl PartialOrd for Obj {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Obj {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.parents, &self.methods).cmp(&(&other.parents, &other.methods))
    }
}

impl std::hash::Hash for Obj {
    /// Closed objects hash as their canonical form, which agrees with
    /// structural equality.
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        if self.closed {
            self.alpha_hash.hash(state);
        } else {
            self.parents.hash(state);
            self.methods.hash(state);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodDecl {
    pub kind: MethodKind,
    pub mt: MethodTypeEffect,
    /// Present exactly when `kind` is `Def`.
    pub body: Option<Body>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Body {
    pub self_var: Name,
    pub params: Vec<Name>,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Call(Call),
    Return(Value),
    Do(Name, Box<Expr>, Box<Expr>),
    Try(Box<Expr>, Handler),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Call {
    pub recv: Value,
    pub method: Name,
    pub targs: Vec<Type>,
    pub args: Vec<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    Continue,
    Stop,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Continue => "continue",
            Mode::Stop => "stop",
        })
    }
}

/// `N[T̄].m: [X̄] <x, x̄, e> μ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub ntype: NominalType,
    pub method: Name,
    pub type_params: Vec<Name>,
    pub self_var: Name,
    pub params: Vec<Name>,
    pub body: Expr,
    pub mode: Mode,
}

/// `⟨c̄; x. e⟩`: clauses plus the final continuation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handler {
    pub clauses: Vec<Clause>,
    pub final_var: Name,
    pub final_expr: Box<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: Name,
    pub type_params: Vec<(Name, Type)>,
    pub parents: BTreeSet<NominalType>,
    pub methods: BTreeMap<Name, MethodDecl>,
}

/// A closed set of nominal declarations. Inheritance is acyclic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: BTreeMap<Name, TypeDecl>,
}

/// Bounded type variables in scope, in binding order.
pub type TypeEnv = Vec<(Name, Type)>;

/// Term variables in scope.
pub type Env = BTreeMap<Name, Type>;

impl Type {
    pub fn object() -> Type {
        Type::Obj(ObjType::default())
    }

    pub fn var(n: &str) -> Type {
        Type::Var(name(n))
    }

    pub fn nominal(n: NominalType) -> Type {
        Type::Obj(ObjType { parents: BTreeSet::from([n]), sig: Signature::new() })
    }

    pub fn plain(n: &str) -> Type {
        Type::nominal(NominalType::plain(n))
    }

    pub fn is_object(&self) -> bool {
        matches!(self, Type::Obj(o) if o.parents.is_empty() && o.sig.is_empty())
    }

    /// The single nominal this type denotes, if it is a bare `N[T̄]`.
    pub fn as_nominal(&self) -> Option<&NominalType> {
        match self {
            Type::Obj(o) if o.sig.is_empty() && o.parents.len() == 1 => o.parents.iter().next(),
            _ => None,
        }
    }
}

impl Effect {
    pub fn atom(recv: Type, method: Name, targs: Vec<Type>) -> Effect {
        Effect::Call(CallAtom { recv, method, targs })
    }

    pub fn union(a: Effect, b: Effect) -> Effect {
        Effect::Union(Box::new(a), Box::new(b))
    }

    pub fn union_all<I: IntoIterator<Item = Effect>>(it: I) -> Effect {
        let mut out: Option<Effect> = None;
        for e in it {
            out = Some(match out {
                None => e,
                Some(acc) => Effect::union(acc, e),
            });
        }
        out.unwrap_or(Effect::Empty)
    }
}

impl Value {
    pub fn obj(parents: BTreeSet<NominalType>, methods: BTreeMap<Name, MethodDecl>) -> Value {
        Value::Obj(Arc::new(Obj::new(parents, methods)))
    }

    /// `N{}`: an object of a single nominal type with no own methods.
    pub fn nominal(n: NominalType) -> Value {
        Value::obj(BTreeSet::from([n]), BTreeMap::new())
    }

    pub fn plain(n: &str) -> Value {
        Value::nominal(NominalType::plain(n))
    }
}

impl Handler {
    /// A handler whose final clause is the identity `x. return x`.
    pub fn with_default_final(clauses: Vec<Clause>, var: Name) -> Self {
        Handler {
            clauses,
            final_var: var.clone(),
            final_expr: Box::new(Expr::Return(Value::Var(var))),
        }
    }

    pub fn has_default_final(&self) -> bool {
        matches!(&*self.final_expr, Expr::Return(Value::Var(v)) if *v == self.final_var)
    }
}

/// `erase(v)`: the object type obtained by forgetting method bodies.
pub fn erase(o: &Obj) -> ObjType {
    ObjType {
        parents: o.parents.clone(),
        sig: o
            .methods
            .iter()
            .map(|(m, d)| (m.clone(), SigEntry { kind: d.kind, mt: d.mt.clone() }))
            .collect(),
    }
}

impl Program {
    pub fn decl(&self, n: &str) -> Option<&TypeDecl> {
        self.decls.get(n)
    }

    /// Parents of `N[T̄]` with the declaration's type parameters instantiated.
    pub fn parents_of(&self, n: &NominalType) -> Option<Vec<NominalType>> {
        let d = self.decls.get(&n.name)?;
        if d.type_params.len() != n.args.len() {
            return None;
        }
        let map = crate::subst::Subst::from_pairs(
            d.type_params.iter().map(|(y, _)| y.clone()).zip(n.args.iter().cloned()),
        );
        Some(d.parents.iter().map(|p| map.apply_nominal(p)).collect())
    }

    /// Declared nominal subtyping: reflexive on α-equal instantiations
    /// (generics are invariant) and transitive through instantiated parents.
    pub fn nominal_sub(&self, a: &NominalType, b: &NominalType) -> bool {
        if b.name.as_ref() == OBJECT && b.args.is_empty() {
            return true;
        }
        let mut stack = vec![a.clone()];
        let mut seen: BTreeSet<NominalType> = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n.name == b.name
                && n.args.len() == b.args.len()
                && n.args.iter().zip(&b.args).all(|(x, y)| crate::subst::alpha_eq_type(x, y))
            {
                return true;
            }
            if !seen.insert(n.clone()) {
                continue;
            }
            if let Some(ps) = self.parents_of(&n) {
                stack.extend(ps);
            }
        }
        false
    }

    /// Name-level ancestry, ignoring type arguments.
    pub fn nominal_name_sub(&self, a: &str, b: &str) -> bool {
        if b == OBJECT {
            return true;
        }
        let mut stack: Vec<&str> = vec![a];
        let mut seen: Vec<&str> = Vec::new();
        while let Some(n) = stack.pop() {
            if n == b {
                return true;
            }
            if seen.contains(&n) {
                continue;
            }
            seen.push(n);
            if let Some(d) = self.decls.get(n) {
                stack.extend(d.parents.iter().map(|p| p.name.as_ref()));
            }
        }
        false
    }

    /// The instantiation of ancestor `target` reached from `n`, if any.
    pub fn ancestor(&self, n: &NominalType, target: &str) -> Option<NominalType> {
        let mut queue = std::collections::VecDeque::from([n.clone()]);
        let mut seen = BTreeSet::new();
        while let Some(cur) = queue.pop_front() {
            if cur.name.as_ref() == target {
                return Some(cur);
            }
            if !seen.insert(cur.clone()) {
                continue;
            }
            if let Some(ps) = self.parents_of(&cur) {
                queue.extend(ps);
            }
        }
        None
    }

    /// Declarations that take part in an inheritance cycle, if any.
    pub fn inheritance_cycle(&self) -> Option<Name> {
        self.decls
            .keys()
            .find(|n| {
                self.decls[*n]
                    .parents
                    .iter()
                    .any(|p| self.nominal_name_sub(&p.name, n))
            })
            .cloned()
    }
}
