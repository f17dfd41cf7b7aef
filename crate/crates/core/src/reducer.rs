//! Pure reduction: method look-up, clause matching and the seven rules
//! that unfold non-magic calls and push `try` blocks towards magic calls.

use std::fmt;

use crate::ast::*;
use crate::mutation::{self, Mutation};
use crate::subst::Subst;

/// Successful outcomes of method look-up.
#[derive(Clone, Debug, PartialEq)]
pub enum Lookup {
    Def { type_params: Vec<Name>, self_var: Name, params: Vec<Name>, body: Expr },
    /// Only nominal declarations yield this.
    Magic(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LookupFailure {
    NotFound,
    /// Two or more parents provide the method.
    Ambiguous(Vec<Name>),
}

impl fmt::Display for LookupFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LookupFailure::NotFound => write!(f, "no such method"),
            LookupFailure::Ambiguous(ns) => {
                let ns: Vec<&str> = ns.iter().map(|n| n.as_ref()).collect();
                write!(f, "ambiguous lookup through {}", ns.join(", "))
            }
        }
    }
}

pub type LookupResult = Result<Lookup, LookupFailure>;

fn def_lookup(d: &MethodDecl) -> Option<Lookup> {
    let b = d.body.as_ref()?;
    (d.kind == MethodKind::Def).then(|| Lookup::Def {
        type_params: d.mt.type_params.iter().map(|(x, _)| x.clone()).collect(),
        self_var: b.self_var.clone(),
        params: b.params.clone(),
        body: b.expr.clone(),
    })
}

pub fn mbody(p: &Program, v: &Value, m: &str) -> LookupResult {
    match v {
        Value::Var(_) => Err(LookupFailure::NotFound),
        Value::Obj(o) => {
            if let Some(l) = o.methods.get(m).and_then(def_lookup) {
                return Ok(l);
            }
            mbody_parents(p, o.parents.iter(), m, 0)
        }
    }
}

fn mbody_parents<'a>(
    p: &Program,
    parents: impl Iterator<Item = &'a NominalType>,
    m: &str,
    depth: usize,
) -> LookupResult {
    let mut found = Vec::new();
    let mut ambiguous = None;
    for n in parents {
        match mbody_nominal(p, n, m, depth) {
            Ok(l) => found.push((n.name.clone(), l)),
            Err(LookupFailure::NotFound) => {}
            Err(e @ LookupFailure::Ambiguous(_)) => ambiguous = Some(e),
        }
    }
    match found.len() {
        1 if ambiguous.is_none() => Ok(found.pop().expect("one").1),
        0 => Err(ambiguous.unwrap_or(LookupFailure::NotFound)),
        _ => Err(LookupFailure::Ambiguous(found.into_iter().map(|(n, _)| n).collect())),
    }
}

fn mbody_nominal(p: &Program, n: &NominalType, m: &str, depth: usize) -> LookupResult {
    // Guards against cyclic hierarchies in unchecked programs.
    if depth > p.decls.len() {
        return Err(LookupFailure::NotFound);
    }
    let d = p.decl(&n.name).ok_or(LookupFailure::NotFound)?;
    if d.type_params.len() != n.args.len() {
        return Err(LookupFailure::NotFound);
    }
    let s = Subst::from_pairs(d.type_params.iter().map(|(y, _)| y.clone()).zip(n.args.iter().cloned()));
    if let Some(md) = d.methods.get(m) {
        match md.kind {
            MethodKind::Mgc => return Ok(Lookup::Magic(d.name.clone())),
            MethodKind::Def => return def_lookup(&s.method(md)).ok_or(LookupFailure::NotFound),
            MethodKind::Abs => {}
        }
    }
    let parents: Vec<NominalType> = d.parents.iter().map(|q| s.nominal(q)).collect();
    mbody_parents(p, parents.iter(), m, depth + 1)
}

/// The erased type of `v` is a subtype of `n`; purely syntactic.
pub fn instance_of(p: &Program, v: &Value, n: &NominalType) -> bool {
    match v {
        Value::Var(_) => false,
        Value::Obj(o) => n.name.as_ref() == OBJECT || o.parents.iter().any(|q| p.nominal_sub(q, n)),
    }
}

pub fn cmatch<'h>(p: &Program, recv: &Value, m: &str, clauses: &'h [Clause]) -> Option<&'h Clause> {
    let hit = |c: &&Clause| c.method.as_ref() == m && instance_of(p, recv, &c.ntype);
    if mutation::active(Mutation::ClauseOrder) {
        clauses.iter().rev().find(hit)
    } else {
        clauses.iter().find(hit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PureRule {
    Invk,
    TryRet,
    TryDo,
    CatchContinue,
    CatchStop,
    Fwd,
    TryCtx,
}

impl PureRule {
    pub fn name(self) -> &'static str {
        match self {
            PureRule::Invk => "invk",
            PureRule::TryRet => "try-ret",
            PureRule::TryDo => "try-do",
            PureRule::CatchContinue => "catch-continue",
            PureRule::CatchStop => "catch-stop",
            PureRule::Fwd => "fwd",
            PureRule::TryCtx => "try-ctx",
        }
    }
}

/// `e[T̄/X̄][v/x][v̄/x̄]`, or `None` on an arity mismatch.
#[allow(clippy::too_many_arguments)]
fn instantiate(xs: &[Name], targs: &[Type], self_var: &Name, recv: &Value, params: &[Name], args: &[Value], e: &Expr, types: bool) -> Option<Expr> {
    if xs.len() != targs.len() || params.len() != args.len() {
        return None;
    }
    let mut s = Subst::new();
    if types {
        for (x, t) in xs.iter().zip(targs) {
            s.add_type(x.clone(), t.clone());
        }
    }
    s.add_value(self_var.clone(), recv.clone());
    for (x, v) in params.iter().zip(args) {
        s.add_value(x.clone(), v.clone());
    }
    Some(s.expr(e))
}

/// One pure step and the rule that produced it; `None` when stuck.
/// `try-ctx` is tried last.
pub fn pure_step(p: &Program, e: &Expr) -> Option<(PureRule, Expr)> {
    match e {
        Expr::Call(c) => match mbody(p, &c.recv, &c.method) {
            Ok(Lookup::Def { type_params, self_var, params, body }) => {
                let subst_types = !mutation::active(Mutation::InvkTypeSubst);
                instantiate(&type_params, &c.targs, &self_var, &c.recv, &params, &c.args, &body, subst_types)
                    .map(|e| (PureRule::Invk, e))
            }
            _ => None,
        },
        Expr::Return(_) | Expr::Do(..) => None,
        Expr::Try(body, h) => match body.as_ref() {
            Expr::Return(v) => Some((
                PureRule::TryRet,
                Expr::Do(h.final_var.clone(), Box::new(Expr::Return(v.clone())), h.final_expr.clone()),
            )),
            Expr::Do(y, e1, e2) => {
                let inner = Handler {
                    clauses: h.clauses.clone(),
                    final_var: y.clone(),
                    final_expr: Box::new(Expr::Try(e2.clone(), h.clone())),
                };
                Some((PureRule::TryDo, Expr::Try(e1.clone(), inner)))
            }
            Expr::Call(c) if matches!(mbody(p, &c.recv, &c.method), Ok(Lookup::Magic(_))) => {
                match cmatch(p, &c.recv, &c.method, &h.clauses) {
                    Some(cl) => {
                        let e = instantiate(&cl.type_params, &c.targs, &cl.self_var, &c.recv, &cl.params, &c.args, &cl.body, true)?;
                        Some(match cl.mode {
                            Mode::Continue => {
                                (PureRule::CatchContinue, Expr::Do(h.final_var.clone(), Box::new(e), h.final_expr.clone()))
                            }
                            Mode::Stop => (PureRule::CatchStop, e),
                        })
                    }
                    None => Some((PureRule::Fwd, Expr::Do(h.final_var.clone(), body.clone(), h.final_expr.clone()))),
                }
            }
            _ => pure_step(p, body).map(|(_, b)| (PureRule::TryCtx, Expr::Try(Box::new(b), h.clone()))),
        },
    }
}

/// Why `e` cannot take a pure step, for diagnostics of stuck terms.
pub fn stuck_reason(p: &Program, e: &Expr) -> String {
    match e {
        Expr::Call(c) => match mbody(p, &c.recv, &c.method) {
            Err(f) => format!("{}: {f}", c.method),
            Ok(Lookup::Magic(n)) => format!("{n}.{} is magic", c.method),
            Ok(Lookup::Def { .. }) => format!("{}: arity mismatch", c.method),
        },
        Expr::Try(b, _) => stuck_reason(p, b),
        Expr::Return(_) => "a returned value".into(),
        Expr::Do(..) => "a do expression".into(),
    }
}
