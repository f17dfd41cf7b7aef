//! Effect normal forms, simplification and handler filters.
//!
//! An effect in normal form is a set of call atoms plus a `top` flag; `top`
//! absorbs everything, the empty set is `pure`. Atoms are kept up to α.

use crate::ast::*;
use crate::mutation::{self, Mutation};
use crate::signatures::{CheckError, Checker};
use crate::subst::{alpha_eq_type, Subst};

/// Upper bound on nested non-magic unfoldings during simplification.
pub const SIMPLIFY_FUEL: usize = 256;

#[derive(Clone, Debug, Default)]
pub struct EffectNF {
    pub top: bool,
    pub atoms: Vec<CallAtom>,
}

pub fn atom_alpha_eq(a: &CallAtom, b: &CallAtom) -> bool {
    a.method == b.method
        && a.targs.len() == b.targs.len()
        && alpha_eq_type(&a.recv, &b.recv)
        && a.targs.iter().zip(&b.targs).all(|(x, y)| alpha_eq_type(x, y))
}

impl EffectNF {
    pub fn pure() -> Self {
        EffectNF::default()
    }

    pub fn top() -> Self {
        EffectNF { top: true, atoms: Vec::new() }
    }

    pub fn of(e: &Effect) -> Self {
        let mut nf = EffectNF::pure();
        nf.absorb(e);
        nf
    }

    fn absorb(&mut self, e: &Effect) {
        match e {
            Effect::Empty => {}
            Effect::Top => self.top = true,
            Effect::Union(a, b) => {
                self.absorb(a);
                self.absorb(b);
            }
            Effect::Call(a) => self.insert(a.clone()),
        }
    }

    pub fn insert(&mut self, a: CallAtom) {
        if !self.atoms.iter().any(|b| atom_alpha_eq(&a, b)) {
            self.atoms.push(a);
        }
    }

    pub fn join(mut self, other: EffectNF) -> EffectNF {
        self.top |= other.top;
        for a in other.atoms {
            self.insert(a);
        }
        self
    }

    pub fn is_pure(&self) -> bool {
        !self.top && self.atoms.is_empty()
    }

    /// Back to syntax; `top` swallows the atoms.
    pub fn to_effect(&self) -> Effect {
        if self.top {
            return Effect::Top;
        }
        Effect::union_all(self.atoms.iter().cloned().map(Effect::Call))
    }

    /// Equality of normal forms up to α and atom order.
    pub fn same(&self, other: &EffectNF) -> bool {
        if self.top || other.top {
            return self.top == other.top;
        }
        self.atoms.iter().all(|a| other.atoms.iter().any(|b| atom_alpha_eq(a, b)))
            && other.atoms.iter().all(|a| self.atoms.iter().any(|b| atom_alpha_eq(a, b)))
    }
}

pub fn normalize(e: &Effect) -> Effect {
    EffectNF::of(e).to_effect()
}

pub fn effect_eq(a: &Effect, b: &Effect) -> bool {
    EffectNF::of(a).same(&EffectNF::of(b))
}

/// One handler clause seen as an effect transformer: atoms `N'.m[T̄]` with
/// `N' <: N` become `effect[T̄/X̄]`.
#[derive(Clone, Debug)]
pub struct ClauseFilter {
    pub ntype: NominalType,
    pub method: Name,
    pub type_params: Vec<(Name, Type)>,
    pub effect: Effect,
    pub mode: Mode,
}

#[derive(Clone, Debug)]
pub struct HandlerFilter {
    pub clauses: Vec<ClauseFilter>,
    pub final_effect: Effect,
}

impl Checker<'_> {
    /// Replace atoms on non-magic methods by their (instantiated) declared
    /// effects until only magic atoms and atoms on type variables remain.
    pub fn simplify(&self, phi: &TypeEnv, e: &Effect) -> Result<Effect, CheckError> {
        Ok(self.simplify_nf(phi, &EffectNF::of(e), SIMPLIFY_FUEL)?.to_effect())
    }

    fn simplify_nf(&self, phi: &TypeEnv, e: &EffectNF, fuel: usize) -> Result<EffectNF, CheckError> {
        if e.top {
            return Ok(EffectNF::top());
        }
        let mut out = EffectNF::pure();
        for a in &e.atoms {
            if let Type::Var(x) = &a.recv {
                if phi.iter().any(|(y, _)| y == x) {
                    out.insert(a.clone());
                    continue;
                }
                return Err(CheckError::UnboundTypeVar(x.to_string()));
            }
            let (kind, mt) = self.mtype(phi, &a.recv, &a.method)?;
            if kind == MethodKind::Mgc {
                out.insert(a.clone());
                continue;
            }
            if fuel == 0 {
                return Err(CheckError::FuelExhausted);
            }
            if mt.type_params.len() != a.targs.len() {
                return Err(CheckError::ArityMismatch {
                    what: format!("type arguments of effect atom .{}", a.method),
                    expected: mt.type_params.len(),
                    found: a.targs.len(),
                });
            }
            let s = Subst::from_pairs(mt.type_params.iter().map(|(x, _)| x.clone()).zip(a.targs.iter().cloned()));
            let unfolded = self.simplify_nf(phi, &EffectNF::of(&s.effect(&mt.effect)), fuel - 1)?;
            if unfolded.top {
                return Ok(EffectNF::top());
            }
            out = out.join(unfolded);
        }
        Ok(out)
    }

    /// `F(φ | H) = F(φ | C̄) ∨ φ'`.
    pub fn apply_filter(&self, phi: &TypeEnv, h: &HandlerFilter, e: &Effect) -> Result<Effect, CheckError> {
        let nf = EffectNF::of(e);
        if nf.top {
            return Ok(Effect::Top);
        }
        let mut out = EffectNF::of(&h.final_effect);
        for a in &nf.atoms {
            out = out.join(EffectNF::of(&self.filter_atom(phi, &h.clauses, a)?));
        }
        Ok(out.to_effect())
    }

    fn filter_atom(&self, phi: &TypeEnv, clauses: &[ClauseFilter], a: &CallAtom) -> Result<Effect, CheckError> {
        for c in clauses {
            if c.method != a.method || c.type_params.len() != a.targs.len() {
                continue;
            }
            if self.subtype(phi, &a.recv, &Type::nominal(c.ntype.clone()))? {
                let s = Subst::from_pairs(c.type_params.iter().map(|(x, _)| x.clone()).zip(a.targs.iter().cloned()));
                return Ok(s.effect(&c.effect));
            }
        }
        Ok(Effect::Call(a.clone()))
    }

    /// The effect of a `try`: simplify the body effect, filter it, and
    /// simplify what the clauses contributed.
    pub fn handled_effect(
        &self,
        phi: &TypeEnv,
        h: &HandlerFilter,
        body_simplified: &Effect,
        body_raw: &Effect,
    ) -> Result<Effect, CheckError> {
        let input = if mutation::active(Mutation::FilterBeforeSimplify) { body_raw } else { body_simplified };
        let filtered = self.apply_filter(phi, h, input)?;
        self.simplify(phi, &filtered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(n: &str, m: &str) -> Effect {
        Effect::atom(Type::plain(n), name(m), vec![])
    }

    #[test]
    fn union_is_idempotent_and_top_absorbs() {
        let a = atom("Exception", "throw");
        let e = Effect::union(a.clone(), Effect::union(Effect::Empty, a.clone()));
        assert_eq!(normalize(&e), a);
        assert_eq!(normalize(&Effect::union(a, Effect::Top)), Effect::Top);
        assert_eq!(normalize(&Effect::union(Effect::Empty, Effect::Empty)), Effect::Empty);
    }

    #[test]
    fn equality_ignores_atom_order() {
        let a = atom("A", "m");
        let b = atom("B", "m");
        assert!(effect_eq(&Effect::union(a.clone(), b.clone()), &Effect::union(b, a)));
    }
}
