//! Signature extraction, subtyping and well-formedness.
//!
//! A [`Checker`] is a session over one program. It memoizes the signatures
//! of nominal declarations and detects re-entrant extraction.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::effects::{atom_alpha_eq, EffectNF};
use crate::mutation::{self, Mutation};
use crate::subst::{alpha_eq_type, fresh, ftv_mt, NameSet, Subst};
use crate::syntax::pretty::{show_effect, show_mt, show_type};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("conflicting inherited method {method}: {detail}")]
    Conflict { method: String, detail: String },
    #[error("invalid override of {method}: {detail}")]
    Override { method: String, detail: String },
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("type argument {ty} violates bound {bound}")]
    BoundViolation { ty: String, bound: String },
    #[error("unbound type variable {0}")]
    UnboundTypeVar(String),
    #[error("effect atom on {method} does not name a magic method")]
    NotMagic { method: String },
    #[error("type {ty} has no method {method}")]
    NoSuchMethod { ty: String, method: String },
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("object literal declares magic method {0}")]
    MgcInObject(String),
    #[error("object leaves abstract method {0} unimplemented")]
    UnimplementedMethod(String),
    #[error("arity mismatch in {what}: expected {expected}, found {found}")]
    ArityMismatch { what: String, expected: usize, found: usize },
    #[error("argument {index} of {method} has type {found}, expected {expected}")]
    ArgTypeMismatch { method: String, index: usize, found: String, expected: String },
    #[error("handler clause {ntype}.{method} does not name a magic method")]
    NotMagicClause { ntype: String, method: String },
    #[error("handler clause type mismatch: {0}")]
    ClauseTypeMismatch(String),
    #[error("method {method} body does not match its declaration: {detail}")]
    MethodMismatch { method: String, detail: String },
    #[error("cyclic signature extraction through {0}")]
    CyclicSignature(String),
    #[error("cyclic inheritance through {0}")]
    CyclicInheritance(String),
    #[error("effect simplification ran out of fuel")]
    FuelExhausted,
}

impl CheckError {
    pub fn code(&self) -> &'static str {
        match self {
            CheckError::Conflict { .. } => "ConflictError",
            CheckError::Override { .. } => "OverrideError",
            CheckError::UnknownType(_) => "UnknownType",
            CheckError::BoundViolation { .. } => "BoundViolation",
            CheckError::UnboundTypeVar(_) => "UnboundTypeVar",
            CheckError::NotMagic { .. } => "NotMagic",
            CheckError::NoSuchMethod { .. } => "NoSuchMethod",
            CheckError::UnboundVar(_) => "UnboundVar",
            CheckError::MgcInObject(_) => "MgcInObject",
            CheckError::UnimplementedMethod(_) => "UnimplementedMethod",
            CheckError::ArityMismatch { .. } => "ArityMismatch",
            CheckError::ArgTypeMismatch { .. } => "ArgTypeMismatch",
            CheckError::NotMagicClause { .. } => "NotMagicClause",
            CheckError::ClauseTypeMismatch(_) => "ClauseTypeMismatch",
            CheckError::MethodMismatch { .. } => "MethodMismatch",
            CheckError::CyclicSignature(_) => "CyclicSignature",
            CheckError::CyclicInheritance(_) => "CyclicInheritance",
            CheckError::FuelExhausted => "FuelExhausted",
        }
    }
}

pub type CResult<T> = Result<T, CheckError>;

pub struct Checker<'p> {
    pub program: &'p Program,
    decl_sigs: RefCell<BTreeMap<Name, CResult<Signature>>>,
    in_progress: RefCell<BTreeSet<Name>>,
    /// Types of closed objects, which do not depend on any environment.
    /// Keyed by the shared pointer, whose equality short-cuts on identity.
    pub(crate) closed_types: RefCell<std::collections::HashMap<std::sync::Arc<Obj>, CResult<Type>>>,
}

pub fn bound_of<'a>(phi: &'a TypeEnv, x: &str) -> Option<&'a Type> {
    phi.iter().rev().find(|(y, _)| y.as_ref() == x).map(|(_, b)| b)
}

/// Bring two method types under common binder names so that their bodies
/// can be compared directly. `None` when the binder counts differ.
pub fn align(a: &MethodTypeEffect, b: &MethodTypeEffect) -> Option<(Vec<Name>, MethodTypeEffect, MethodTypeEffect)> {
    if a.type_params.len() != b.type_params.len() {
        return None;
    }
    let mut free = NameSet::new();
    ftv_mt(b, &mut free);
    let names: Vec<Name> = if a.type_params.iter().any(|(x, _)| free.contains(x)) {
        let mut taken = free.clone();
        ftv_mt(a, &mut taken);
        taken.extend(a.type_params.iter().map(|(x, _)| x.clone()));
        taken.extend(b.type_params.iter().map(|(x, _)| x.clone()));
        let mut out = Vec::new();
        for (x, _) in &a.type_params {
            let n = fresh(x, |c| taken.contains(c));
            taken.insert(n.clone());
            out.push(n);
        }
        out
    } else {
        a.type_params.iter().map(|(x, _)| x.clone()).collect()
    };
    let open = |mt: &MethodTypeEffect| {
        let s = Subst::from_pairs(mt.type_params.iter().map(|(x, _)| x.clone()).zip(names.iter().map(|n| Type::Var(n.clone()))));
        MethodTypeEffect {
            type_params: names.iter().cloned().zip(mt.type_params.iter().map(|(_, b)| s.ty(b))).collect(),
            param_types: mt.param_types.iter().map(|t| s.ty(t)).collect(),
            ret: s.ty(&mt.ret),
            effect: s.effect(&mt.effect),
        }
    };
    Some((names.clone(), open(a), open(b)))
}

fn extend(phi: &TypeEnv, params: &[(Name, Type)]) -> TypeEnv {
    let mut out = phi.clone();
    out.extend(params.iter().cloned());
    out
}

fn kind_le(a: MethodKind, b: MethodKind) -> bool {
    a == b || (a == MethodKind::Def && b == MethodKind::Abs)
}

impl<'p> Checker<'p> {
    pub fn new(program: &'p Program) -> Self {
        Checker {
            program,
            decl_sigs: RefCell::new(BTreeMap::new()),
            in_progress: RefCell::new(BTreeSet::new()),
            closed_types: RefCell::default(),
        }
    }

    // -- extraction ------------------------------------------------------------

    /// `typeof(Φ, T)`.
    pub fn typeof_sig(&self, phi: &TypeEnv, t: &Type) -> CResult<Signature> {
        match t {
            Type::Var(x) => {
                let b = bound_of(phi, x).ok_or_else(|| CheckError::UnboundTypeVar(x.to_string()))?;
                let outer: TypeEnv = {
                    let idx = phi.iter().rposition(|(y, _)| y == x).unwrap_or(0);
                    phi[..idx].to_vec()
                };
                // Calls on a variable receiver carry the variable call-effect
                // `X.m[X̄]`; its bound only matters through sub-var-call.
                let sig = self.typeof_sig(&outer, b)?;
                Ok(sig
                    .into_iter()
                    .map(|(m, e)| {
                        let mut mt = e.mt;
                        mt.effect = Effect::atom(
                            t.clone(),
                            m.clone(),
                            mt.type_params.iter().map(|(y, _)| Type::Var(y.clone())).collect(),
                        );
                        (m, SigEntry { kind: e.kind, mt })
                    })
                    .collect())
            }
            Type::Obj(o) => {
                let mut base = Signature::new();
                for p in &o.parents {
                    let s = self.typeof_nominal(phi, p)?;
                    base = self.sym_sum(phi, base, s)?;
                }
                self.override_sum(phi, base, &o.sig)
            }
        }
    }

    /// `typeof(Φ, N[T̄])`: the declaration's signature instantiated.
    pub fn typeof_nominal(&self, phi: &TypeEnv, n: &NominalType) -> CResult<Signature> {
        self.wf_nominal(phi, n)?;
        let decl = &self.program.decls[&n.name];
        let sig = self.decl_sig(&n.name)?;
        let s = Subst::from_pairs(decl.type_params.iter().map(|(y, _)| y.clone()).zip(n.args.iter().cloned()));
        Ok(sig.iter().map(|(m, e)| (m.clone(), SigEntry { kind: e.kind, mt: s.mt(&e.mt) })).collect())
    }

    /// The signature of a declaration with its own parameters free.
    pub fn decl_sig(&self, n: &Name) -> CResult<Signature> {
        if let Some(r) = self.decl_sigs.borrow().get(n) {
            return r.clone();
        }
        if !self.in_progress.borrow_mut().insert(n.clone()) {
            return Err(CheckError::CyclicSignature(n.to_string()));
        }
        let r = self.compute_decl_sig(n);
        self.in_progress.borrow_mut().remove(n);
        self.decl_sigs.borrow_mut().insert(n.clone(), r.clone());
        r
    }

    fn compute_decl_sig(&self, n: &Name) -> CResult<Signature> {
        let decl = self.program.decls.get(n).ok_or_else(|| CheckError::UnknownType(n.to_string()))?;
        let phi: TypeEnv = decl.type_params.clone();
        for (_, b) in &decl.type_params {
            self.wf_type(&phi, b)?;
        }
        let mut base = Signature::new();
        for p in &decl.parents {
            let s = self.typeof_nominal(&phi, p)?;
            base = self.sym_sum(&phi, base, s)?;
        }
        let own: Signature = decl
            .methods
            .iter()
            .map(|(m, d)| (m.clone(), SigEntry { kind: d.kind, mt: d.mt.clone() }))
            .collect();
        for e in own.values() {
            self.wf_mt(&phi, &e.mt)?;
        }
        self.override_sum(&phi, base, &own)
    }

    /// `s1 ⊎ s2`: shared methods must agree and may not be magic.
    pub fn sym_sum(&self, _phi: &TypeEnv, mut s1: Signature, s2: Signature) -> CResult<Signature> {
        for (m, e2) in s2 {
            let Some(e1) = s1.get(&m) else {
                s1.insert(m, e2);
                continue;
            };
            if e1.kind == MethodKind::Mgc || e2.kind == MethodKind::Mgc {
                return Err(CheckError::Conflict { method: m.to_string(), detail: "magic methods cannot be merged".into() });
            }
            let same = align(&e1.mt, &e2.mt).map(|(_, a, b)| {
                a.type_params.iter().zip(&b.type_params).all(|((_, x), (_, y))| alpha_eq_type(x, y))
                    && a.param_types.len() == b.param_types.len()
                    && a.param_types.iter().zip(&b.param_types).all(|(x, y)| alpha_eq_type(x, y))
                    && alpha_eq_type(&a.ret, &b.ret)
                    && EffectNF::of(&a.effect).same(&EffectNF::of(&b.effect))
            });
            if same != Some(true) {
                return Err(CheckError::Conflict {
                    method: m.to_string(),
                    detail: format!("{} vs {}", show_mt(&e1.mt), show_mt(&e2.mt)),
                });
            }
            let kind = sum_kind(e1.kind, e2.kind);
            let mt = e1.mt.clone();
            s1.insert(m, SigEntry { kind, mt });
        }
        Ok(s1)
    }

    /// `s ⊕ s'`: `s'` overrides `s`.
    pub fn override_sum(&self, phi: &TypeEnv, mut base: Signature, own: &Signature) -> CResult<Signature> {
        for (m, new) in own {
            if let Some(old) = base.get(m) {
                self.check_override(phi, m, old, new)?;
            }
            base.insert(m.clone(), new.clone());
        }
        Ok(base)
    }

    fn check_override(&self, phi: &TypeEnv, m: &Name, old: &SigEntry, new: &SigEntry) -> CResult<()> {
        let fail = |detail: String| Err(CheckError::Override { method: m.to_string(), detail });
        let Some((_, o, n)) = align(&old.mt, &new.mt) else {
            return fail("type parameter counts differ".into());
        };
        let same_params = o.type_params.iter().zip(&n.type_params).all(|((_, x), (_, y))| alpha_eq_type(x, y))
            && o.param_types.len() == n.param_types.len()
            && o.param_types.iter().zip(&n.param_types).all(|(x, y)| alpha_eq_type(x, y));
        if !same_params {
            return fail(format!("parameters differ: {} vs {}", show_mt(&old.mt), show_mt(&new.mt)));
        }
        if new.kind == MethodKind::Abs && old.kind != MethodKind::Abs {
            return fail("an implemented method cannot become abstract".into());
        }
        if (old.kind == MethodKind::Mgc) != (new.kind == MethodKind::Mgc) {
            return fail("magic methods can only be overridden by magic methods".into());
        }
        if old.kind == MethodKind::Mgc && !alpha_eq_type(&o.ret, &n.ret) {
            return fail("magic overrides must keep the return type".into());
        }
        let inner = extend(phi, &n.type_params);
        if !self.subtype(&inner, &n.ret, &o.ret)? {
            return fail(format!("return type {} is not a subtype of {}", show_type(&n.ret), show_type(&o.ret)));
        }
        if !self.subeffect(&inner, &n.effect, &o.effect)? {
            return fail(format!("effect {} is not a subeffect of {}", show_effect(&n.effect), show_effect(&o.effect)));
        }
        Ok(())
    }

    /// `mtype(Φ, T, m)`.
    pub fn mtype(&self, phi: &TypeEnv, t: &Type, m: &Name) -> CResult<(MethodKind, MethodTypeEffect)> {
        let sig = self.typeof_sig(phi, t)?;
        sig.get(m)
            .map(|e| (e.kind, e.mt.clone()))
            .ok_or_else(|| CheckError::NoSuchMethod { ty: show_type(t), method: m.to_string() })
    }

    /// The nearest declaration of `m` reachable from `t`, without validating
    /// the hierarchy. Used where full extraction would re-enter itself.
    pub fn lookup_declared(&self, phi: &TypeEnv, t: &Type, m: &Name) -> Option<(MethodKind, MethodTypeEffect)> {
        match t {
            Type::Var(x) => {
                let b = bound_of(phi, x)?;
                let idx = phi.iter().rposition(|(y, _)| y == x)?;
                self.lookup_declared(&phi[..idx].to_vec(), b, m)
            }
            Type::Obj(o) => {
                if let Some(e) = o.sig.get(m) {
                    return Some((e.kind, e.mt.clone()));
                }
                o.parents.iter().find_map(|p| self.lookup_nominal_declared(p, m, 0))
            }
        }
    }

    fn lookup_nominal_declared(&self, n: &NominalType, m: &Name, depth: usize) -> Option<(MethodKind, MethodTypeEffect)> {
        if depth > self.program.decls.len() {
            return None;
        }
        let decl = self.program.decls.get(&n.name)?;
        if decl.type_params.len() != n.args.len() {
            return None;
        }
        let s = Subst::from_pairs(decl.type_params.iter().map(|(y, _)| y.clone()).zip(n.args.iter().cloned()));
        if let Some(d) = decl.methods.get(m) {
            return Some((d.kind, s.mt(&d.mt)));
        }
        decl.parents.iter().find_map(|p| self.lookup_nominal_declared(&s.nominal(p), m, depth + 1))
    }

    // -- subtyping -------------------------------------------------------------

    pub fn subtype(&self, phi: &TypeEnv, a: &Type, b: &Type) -> CResult<bool> {
        if b.is_object() {
            return Ok(true);
        }
        match (a, b) {
            (Type::Var(x), Type::Var(y)) => Ok(x == y),
            (Type::Obj(oa), Type::Obj(ob)) => {
                let nominal_ok = ob
                    .parents
                    .iter()
                    .all(|nb| oa.parents.iter().any(|na| self.program.nominal_sub(na, nb)));
                if !nominal_ok {
                    return Ok(false);
                }
                for (m, eb) in &ob.sig {
                    let Some(ea) = oa.sig.get(m) else { return Ok(false) };
                    if !kind_le(ea.kind, eb.kind) || !self.sub_mt(phi, &ea.mt, &eb.mt)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// Method types: same parameters, covariant result and effect.
    pub fn sub_mt(&self, phi: &TypeEnv, a: &MethodTypeEffect, b: &MethodTypeEffect) -> CResult<bool> {
        let Some((_, a, b)) = align(a, b) else { return Ok(false) };
        let same = a.type_params.iter().zip(&b.type_params).all(|((_, x), (_, y))| alpha_eq_type(x, y))
            && a.param_types.len() == b.param_types.len()
            && a.param_types.iter().zip(&b.param_types).all(|(x, y)| alpha_eq_type(x, y));
        if !same {
            return Ok(false);
        }
        let inner = extend(phi, &a.type_params);
        Ok(self.subtype(&inner, &a.ret, &b.ret)? && self.subeffect(&inner, &a.effect, &b.effect)?)
    }

    pub fn subeffect(&self, phi: &TypeEnv, a: &Effect, b: &Effect) -> CResult<bool> {
        let (na, nb) = (EffectNF::of(a), EffectNF::of(b));
        self.subeffect_nf(phi, &na, &nb)
    }

    fn subeffect_nf(&self, phi: &TypeEnv, a: &EffectNF, b: &EffectNF) -> CResult<bool> {
        if b.top {
            return Ok(true);
        }
        if a.top {
            return Ok(false);
        }
        for atom in &a.atoms {
            if !self.atom_below(phi, atom, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn atom_below(&self, phi: &TypeEnv, a: &CallAtom, b: &EffectNF) -> CResult<bool> {
        if b.atoms.iter().any(|x| atom_alpha_eq(a, x)) {
            return Ok(true);
        }
        let a_magic = matches!(self.lookup_declared(phi, &a.recv, &a.method), Some((MethodKind::Mgc, _)));
        if a_magic {
            for c in &b.atoms {
                if c.method != a.method || c.targs.len() != a.targs.len() {
                    continue;
                }
                if !matches!(self.lookup_declared(phi, &c.recv, &c.method), Some((MethodKind::Mgc, _))) {
                    continue;
                }
                if !self.subtype(phi, &a.recv, &c.recv)? {
                    continue;
                }
                let mut args_ok = true;
                for (x, y) in a.targs.iter().zip(&c.targs) {
                    if !self.subtype(phi, x, y)? {
                        args_ok = false;
                        break;
                    }
                }
                if args_ok {
                    return Ok(true);
                }
            }
        }
        if let Type::Var(x) = &a.recv {
            let Some(bound) = bound_of(phi, x) else { return Err(CheckError::UnboundTypeVar(x.to_string())) };
            let (_, mt) = self.mtype(phi, bound, &a.method)?;
            if mt.type_params.len() != a.targs.len() {
                return Ok(false);
            }
            let s = Subst::from_pairs(mt.type_params.iter().map(|(y, _)| y.clone()).zip(a.targs.iter().cloned()));
            let unfolded = self.simplify(phi, &s.effect(&mt.effect))?;
            return self.subeffect_nf(phi, &EffectNF::of(&unfolded), b);
        }
        Ok(false)
    }

    // -- well-formedness ---------------------------------------------------------

    pub fn wf_type(&self, phi: &TypeEnv, t: &Type) -> CResult<()> {
        match t {
            Type::Var(x) => {
                if bound_of(phi, x).is_some() {
                    Ok(())
                } else {
                    Err(CheckError::UnboundTypeVar(x.to_string()))
                }
            }
            Type::Obj(o) => {
                for p in &o.parents {
                    self.wf_nominal(phi, p)?;
                }
                for e in o.sig.values() {
                    self.wf_mt(phi, &e.mt)?;
                }
                if !o.sig.is_empty() || o.parents.len() > 1 {
                    self.typeof_sig(phi, t)?;
                }
                Ok(())
            }
        }
    }

    pub fn wf_nominal(&self, phi: &TypeEnv, n: &NominalType) -> CResult<()> {
        let decl = self.program.decls.get(&n.name).ok_or_else(|| CheckError::UnknownType(n.name.to_string()))?;
        if decl.type_params.len() != n.args.len() {
            return Err(CheckError::ArityMismatch {
                what: format!("type arguments of {}", n.name),
                expected: decl.type_params.len(),
                found: n.args.len(),
            });
        }
        for a in &n.args {
            self.wf_type(phi, a)?;
        }
        let s = Subst::from_pairs(decl.type_params.iter().map(|(y, _)| y.clone()).zip(n.args.iter().cloned()));
        for (a, (_, b)) in n.args.iter().zip(&decl.type_params) {
            let b = s.ty(b);
            if !self.subtype(phi, a, &b)? {
                return Err(CheckError::BoundViolation { ty: show_type(a), bound: show_type(&b) });
            }
        }
        Ok(())
    }

    pub fn wf_mt(&self, phi: &TypeEnv, mt: &MethodTypeEffect) -> CResult<()> {
        let inner = extend(phi, &mt.type_params);
        for (_, b) in &mt.type_params {
            self.wf_type(&inner, b)?;
        }
        for t in &mt.param_types {
            self.wf_type(&inner, t)?;
        }
        self.wf_type(&inner, &mt.ret)?;
        self.wf_effect(&inner, &mt.effect)
    }

    pub fn wf_effect(&self, phi: &TypeEnv, e: &Effect) -> CResult<()> {
        let nf = EffectNF::of(e);
        for a in &nf.atoms {
            self.wf_type(phi, &a.recv)?;
            for t in &a.targs {
                self.wf_type(phi, t)?;
            }
            let found = self.lookup_declared(phi, &a.recv, &a.method);
            match (&a.recv, found) {
                (_, None) => {
                    return Err(CheckError::NoSuchMethod { ty: show_type(&a.recv), method: a.method.to_string() })
                }
                (Type::Var(_), Some(_)) => {}
                (Type::Obj(_), Some((MethodKind::Mgc, _))) => {}
                (Type::Obj(_), Some(_)) => return Err(CheckError::NotMagic { method: a.method.to_string() }),
            }
            if let Some((_, mt)) = self.lookup_declared(phi, &a.recv, &a.method) {
                if mt.type_params.len() != a.targs.len() {
                    return Err(CheckError::ArityMismatch {
                        what: format!("type arguments of effect atom .{}", a.method),
                        expected: mt.type_params.len(),
                        found: a.targs.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Kind of a method inherited from two parents.
fn sum_kind(a: MethodKind, b: MethodKind) -> MethodKind {
    use MethodKind::*;
    let flipped = mutation::active(Mutation::SymSumKinds);
    match (a, b, flipped) {
        (Abs, Abs, false) | (Def, Def, false) => Abs,
        (Abs, Def, false) | (Def, Abs, false) => Def,
        (Def, Def, true) => Def,
        (Abs, _, true) | (_, Abs, true) => Abs,
        _ => Abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_table() {
        use MethodKind::*;
        assert_eq!(sum_kind(Abs, Abs), Abs);
        assert_eq!(sum_kind(Def, Def), Abs);
        assert_eq!(sum_kind(Abs, Def), Def);
        assert_eq!(sum_kind(Def, Abs), Def);
    }

    #[test]
    fn kind_order() {
        use MethodKind::*;
        assert!(kind_le(Def, Abs));
        assert!(!kind_le(Abs, Def));
        assert!(kind_le(Mgc, Mgc));
        assert!(!kind_le(Mgc, Abs));
    }
}
