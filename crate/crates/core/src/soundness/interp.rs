//! Effect denotations and the interpretations built on them.
//!
//! An interpretation lifts a predicate `A` on `X` to a predicate on `M X`,
//! indexed by an effect. Here predicates are closures and monadic values
//! are inspected through their finite [`Shape`].

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::monads::{ExcMap, Shape};
use crate::syntax::pretty::show_effect;

/// The magic method whose calls denote nondeterministic choice.
pub const CHOICE: (&str, &str) = ("Chooser", "choose");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    Exc,
    ListForall,
    ListExists,
    DistForall,
    DistExists,
    /// A deliberately wrong variant of `Exc` that reads `top` as no
    /// exceptions at all.
    BrokenExc,
}

impl Interp {
    pub const BUILT_IN: [Interp; 5] =
        [Interp::Exc, Interp::ListForall, Interp::ListExists, Interp::DistForall, Interp::DistExists];

    pub fn name(self) -> &'static str {
        match self {
            Interp::Exc => "exc",
            Interp::ListForall => "list-forall",
            Interp::ListExists => "list-exists",
            Interp::DistForall => "dist-forall",
            Interp::DistExists => "dist-exists",
            Interp::BrokenExc => "broken-exc",
        }
    }

    pub fn monad(self) -> &'static str {
        match self {
            Interp::Exc | Interp::BrokenExc => "exc",
            Interp::ListForall | Interp::ListExists => "list",
            Interp::DistForall | Interp::DistExists => "dist",
        }
    }

    /// The built-in interpretations for a monad.
    pub fn for_monad(monad: &str) -> &'static [Interp] {
        match monad {
            "exc" => &[Interp::Exc],
            "list" => &[Interp::ListForall, Interp::ListExists],
            "dist" => &[Interp::DistForall, Interp::DistExists],
            _ => &[],
        }
    }

    /// `forall`/`exists` select the variant for `monad`.
    pub fn select(monad: &str, variant: &str) -> Option<Interp> {
        match (monad, variant) {
            ("exc", _) => Some(Interp::Exc),
            ("list", "forall") => Some(Interp::ListForall),
            ("list", "exists") => Some(Interp::ListExists),
            ("dist", "forall") => Some(Interp::DistForall),
            ("dist", "exists") => Some(Interp::DistExists),
            _ => None,
        }
    }

    fn is_exc(self) -> bool {
        matches!(self, Interp::Exc | Interp::BrokenExc)
    }
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DenotationError {
    #[error("effect {0} has no reading under the {1} interpretation")]
    UnknownAtom(String, &'static str),
}

/// `⟦φ⟧`: the exceptions an effect may raise and whether it may choose.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Denotation {
    pub excs: BTreeSet<Name>,
    pub nd: bool,
}

/// Computes denotations over the declarations of one program. Results
/// are memoized per effect for the lifetime of the denoter.
pub struct Denoter<'p> {
    program: &'p Program,
    exc: ExcMap,
    exception_nominals: Vec<&'p Name>,
    memo: RefCell<HashMap<(Interp, Effect), Result<Denotation, DenotationError>>>,
}

impl<'p> Denoter<'p> {
    pub fn new(program: &'p Program, exc: ExcMap) -> Self {
        let exception_nominals = program
            .decls
            .keys()
            .filter(|d| exc.0.keys().any(|k| program.nominal_name_sub(d, k)))
            .collect();
        Denoter { program, exc, exception_nominals, memo: RefCell::new(HashMap::new()) }
    }

    /// Declared nominals below some mapped exception type.
    pub fn exception_nominals(&self) -> Vec<&'p Name> {
        self.exception_nominals.clone()
    }

    fn has_magic(&self, d: &str, m: &str) -> bool {
        let mut stack = vec![d.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            let Some(decl) = self.program.decl(&n) else { continue };
            if let Some(md) = decl.methods.get(m) {
                if md.kind == MethodKind::Mgc {
                    return true;
                }
            }
            stack.extend(decl.parents.iter().map(|p| p.name.to_string()));
        }
        false
    }

    fn atom_excs(&self, a: &CallAtom) -> Option<BTreeSet<Name>> {
        let n = a.recv.as_nominal()?;
        let out: BTreeSet<Name> = self
            .exception_nominals
            .iter()
            .copied()
            .filter(|d| self.program.nominal_name_sub(d, &n.name) && self.has_magic(d, &a.method))
            .map(|d| self.exc.of_name(d))
            .collect();
        (!out.is_empty()).then_some(out)
    }

    fn is_choice(&self, a: &CallAtom) -> bool {
        a.method.as_ref() == CHOICE.1
            && a.recv.as_nominal().is_some_and(|n| self.program.nominal_name_sub(&n.name, CHOICE.0))
    }

    /// `excSet(φ)`. `broken` reads `top` as the empty set.
    pub fn exc_set(&self, e: &Effect, broken: bool) -> Result<BTreeSet<Name>, DenotationError> {
        match e {
            Effect::Empty => Ok(BTreeSet::new()),
            Effect::Top if broken => Ok(BTreeSet::new()),
            Effect::Top => Ok(self.exception_nominals().into_iter().map(|d| self.exc.of_name(d)).collect()),
            Effect::Union(a, b) => {
                let mut s = self.exc_set(a, broken)?;
                s.extend(self.exc_set(b, broken)?);
                Ok(s)
            }
            Effect::Call(a) => {
                self.atom_excs(a).ok_or_else(|| DenotationError::UnknownAtom(show_effect(e), "exception"))
            }
        }
    }

    /// `ndFlag(φ)`. Atoms other than choice must at least have an
    /// exception reading, under which they never choose.
    pub fn nd_flag(&self, e: &Effect) -> Result<bool, DenotationError> {
        match e {
            Effect::Empty => Ok(false),
            Effect::Top => Ok(true),
            Effect::Union(a, b) => Ok(self.nd_flag(a)? | self.nd_flag(b)?),
            Effect::Call(a) if self.is_choice(a) => Ok(true),
            Effect::Call(a) => match self.atom_excs(a) {
                Some(_) => Ok(false),
                None => Err(DenotationError::UnknownAtom(show_effect(e), "nondeterminism")),
            },
        }
    }

    pub fn denote(&self, interp: Interp, e: &Effect) -> Result<Denotation, DenotationError> {
        let key = (interp, e.clone());
        if let Some(d) = self.memo.borrow().get(&key) {
            return d.clone();
        }
        let d = self.denote_uncached(interp, e);
        self.memo.borrow_mut().insert(key, d.clone());
        d
    }

    fn denote_uncached(&self, interp: Interp, e: &Effect) -> Result<Denotation, DenotationError> {
        if interp.is_exc() {
            Ok(Denotation { excs: self.exc_set(e, interp == Interp::BrokenExc)?, nd: false })
        } else {
            Ok(Denotation { excs: BTreeSet::new(), nd: self.nd_flag(e)? })
        }
    }

    /// Whether programs with main effect `e` run under `interp`'s monad
    /// without reaching an unregistered magic call that escapes.
    pub fn applicable(&self, interp: Interp, e: &Effect) -> Result<(), String> {
        let atoms = atoms_of(e).map_err(|_| "the top effect admits any magic call".to_string())?;
        for a in atoms {
            let ok = if interp.is_exc() { self.atom_excs(a).is_some() } else { self.is_choice(a) };
            if !ok {
                return Err(format!("{} is not interpreted by the {} monad", show_effect(&Effect::Call(a.clone())), interp.monad()));
            }
        }
        Ok(())
    }
}

fn atoms_of(e: &Effect) -> Result<Vec<&CallAtom>, ()> {
    match e {
        Effect::Empty => Ok(Vec::new()),
        Effect::Top => Err(()),
        Effect::Union(a, b) => {
            let mut v = atoms_of(a)?;
            v.extend(atoms_of(b)?);
            Ok(v)
        }
        Effect::Call(a) => Ok(vec![a]),
    }
}

/// `λ^φ(A)` applied to an observation: does `m` satisfy the lifting of
/// `a` at denotation `den`? Bottom is always accepted, since
/// approximations must be well-typed. List checks see the observed prefix only.
pub fn holds<T>(interp: Interp, den: &Denotation, m: &Shape<T>, a: &dyn Fn(&T) -> bool) -> bool {
    match (interp, m) {
        (_, Shape::Bottom) => true,
        (Interp::Exc | Interp::BrokenExc, Shape::Value(x)) => a(x),
        (Interp::Exc | Interp::BrokenExc, Shape::Raised(e)) => den.excs.contains(e),
        (Interp::ListForall, Shape::List { items, .. }) => {
            (den.nd || items.len() <= 1) && items.iter().all(a)
        }
        (Interp::ListExists, Shape::List { items, .. }) => {
            items.is_empty() || if den.nd { items.iter().any(a) } else { items.len() == 1 && a(&items[0]) }
        }
        // Pushing a distribution forward merges points, so a bound on the
        // support size would not be natural; both readings ignore `nd`.
        (Interp::DistForall, Shape::Dist(ws)) => ws.iter().all(|(x, _)| a(x)),
        (Interp::DistExists, Shape::Dist(ws)) => ws.is_empty() || ws.iter().any(|(x, _)| a(x)),
        _ => false,
    }
}
