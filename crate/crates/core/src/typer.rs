//! Typing of values, expressions, handlers, methods and programs.
//!
//! Judgments return the inferred type and a simplified effect. Failures
//! carry the stack of rule names that were being applied.

use std::cell::RefCell;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::ast::*;
use crate::effects::{ClauseFilter, EffectNF, HandlerFilter};
use crate::signatures::{align, CResult, CheckError, Checker};
use crate::subst::Subst;
use crate::syntax::pretty::{show_effect, show_type};
use crate::syntax::Source;

#[derive(Clone, Debug, PartialEq)]
pub struct Typed {
    pub ty: Type,
    pub effect: Effect,
}

/// One type error, ready for JSON-lines output.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub rule: String,
    pub loc: String,
    pub msg: String,
    pub trace: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
}

#[derive(Default)]
pub(crate) struct RuleTrace {
    stack: Vec<&'static str>,
    failed: Option<Vec<&'static str>>,
}

thread_local! {
    static TRACE: RefCell<RuleTrace> = RefCell::new(RuleTrace::default());
}

/// Run `f` under rule `name`, remembering the rule stack of the first failure.
fn rule<T>(name: &'static str, f: impl FnOnce() -> CResult<T>) -> CResult<T> {
    TRACE.with(|t| t.borrow_mut().stack.push(name));
    let r = f();
    TRACE.with(|t| {
        let mut t = t.borrow_mut();
        if r.is_err() && t.failed.is_none() {
            t.failed = Some(t.stack.clone());
        }
        t.stack.pop();
    });
    r
}

fn take_failure_trace() -> Vec<&'static str> {
    TRACE.with(|t| {
        let mut t = t.borrow_mut();
        t.stack.clear();
        t.failed.take().unwrap_or_default()
    })
}

fn extend_phi(phi: &TypeEnv, params: &[(Name, Type)]) -> TypeEnv {
    let mut out = phi.clone();
    out.extend(params.iter().cloned());
    out
}

impl Checker<'_> {
    pub fn type_value(&self, phi: &TypeEnv, gamma: &Env, v: &Value) -> CResult<Type> {
        match v {
            Value::Var(x) => rule("t-var", || gamma.get(x).cloned().ok_or_else(|| CheckError::UnboundVar(x.to_string()))),
            Value::Obj(o) if o.is_closed() => {
                if let Some(t) = self.closed_types.borrow().get(o) {
                    return t.clone();
                }
                let t = rule("t-obj", || self.type_obj(phi, gamma, o));
                self.closed_types.borrow_mut().insert(o.clone(), t.clone());
                t
            }
            Value::Obj(o) => rule("t-obj", || self.type_obj(phi, gamma, o)),
        }
    }

    fn type_obj(&self, phi: &TypeEnv, gamma: &Env, o: &Obj) -> CResult<Type> {
        if let Some((m, _)) = o.methods.iter().find(|(_, d)| d.kind == MethodKind::Mgc) {
            return Err(CheckError::MgcInObject(m.to_string()));
        }
        let sig: Signature =
            o.methods.iter().map(|(m, d)| (m.clone(), SigEntry { kind: d.kind, mt: d.mt.clone() })).collect();
        for e in sig.values() {
            self.wf_mt(phi, &e.mt)?;
        }
        let t = Type::Obj(ObjType { parents: o.parents.clone(), sig });
        let full = self.typeof_sig(phi, &t)?;
        if let Some((m, _)) = full.iter().find(|(_, e)| e.kind == MethodKind::Abs) {
            return Err(CheckError::UnimplementedMethod(m.to_string()));
        }
        rule("t-meths", || {
            for (m, d) in &o.methods {
                self.check_method(phi, gamma, &t, m, d)?;
            }
            Ok(())
        })?;
        Ok(t)
    }

    /// `t-meth`: the body's type-and-effect is below the declared one.
    pub fn check_method(&self, phi: &TypeEnv, gamma: &Env, self_ty: &Type, m: &Name, d: &MethodDecl) -> CResult<()> {
        let Some(body) = &d.body else { return Ok(()) };
        rule("t-meth", || {
            if body.params.len() != d.mt.param_types.len() {
                return Err(CheckError::ArityMismatch {
                    what: format!("parameters of {m}"),
                    expected: d.mt.param_types.len(),
                    found: body.params.len(),
                });
            }
            let inner_phi = extend_phi(phi, &d.mt.type_params);
            let mut inner = gamma.clone();
            inner.insert(body.self_var.clone(), self_ty.clone());
            for (x, t) in body.params.iter().zip(&d.mt.param_types) {
                inner.insert(x.clone(), t.clone());
            }
            let got = self.type_expr(&inner_phi, &inner, &body.expr)?;
            let declared = self.simplify(&inner_phi, &d.mt.effect)?;
            if !self.subtype(&inner_phi, &got.ty, &d.mt.ret)? {
                return Err(CheckError::MethodMismatch {
                    method: m.to_string(),
                    detail: format!("type {} is not a subtype of {}", show_type(&got.ty), show_type(&d.mt.ret)),
                });
            }
            if !self.subeffect(&inner_phi, &got.effect, &declared)? {
                return Err(CheckError::MethodMismatch {
                    method: m.to_string(),
                    detail: format!("effect {} is not a subeffect of {}", show_effect(&got.effect), show_effect(&declared)),
                });
            }
            Ok(())
        })
    }

    pub fn type_expr(&self, phi: &TypeEnv, gamma: &Env, e: &Expr) -> CResult<Typed> {
        Ok(self.type_expr_raw(phi, gamma, e)?.0)
    }

    /// Also returns the unsimplified effect of a call, which only the
    /// filter-order fault looks at.
    fn type_expr_raw(&self, phi: &TypeEnv, gamma: &Env, e: &Expr) -> CResult<(Typed, Effect)> {
        match e {
            Expr::Call(c) => rule("t-invk", || self.type_call(phi, gamma, c)),
            Expr::Return(v) => rule("t-ret", || {
                let t = Typed { ty: self.type_value(phi, gamma, v)?, effect: Effect::Empty };
                Ok((t, Effect::Empty))
            }),
            Expr::Do(x, a, b) => rule("t-do", || {
                let ta = self.type_expr(phi, gamma, a)?;
                let mut inner = gamma.clone();
                inner.insert(x.clone(), ta.ty.clone());
                let tb = self.type_expr(phi, &inner, b)?;
                let eff = EffectNF::of(&ta.effect).join(EffectNF::of(&tb.effect)).to_effect();
                Ok((Typed { ty: tb.ty, effect: eff.clone() }, eff))
            }),
            Expr::Try(body, h) => rule("t-try", || {
                let (tb, raw) = self.type_expr_raw(phi, gamma, body)?;
                let (ty, filter) = rule("t-handler", || self.type_handler(phi, gamma, &tb.ty, h))?;
                let effect = self.handled_effect(phi, &filter, &tb.effect, &raw)?;
                Ok((Typed { ty, effect: effect.clone() }, effect))
            }),
        }
    }

    fn type_call(&self, phi: &TypeEnv, gamma: &Env, c: &Call) -> CResult<(Typed, Effect)> {
        let recv = self.type_value(phi, gamma, &c.recv)?;
        let (_, mt) = self.mtype(phi, &recv, &c.method)?;
        if mt.type_params.len() != c.targs.len() {
            return Err(CheckError::ArityMismatch {
                what: format!("type arguments of {}", c.method),
                expected: mt.type_params.len(),
                found: c.targs.len(),
            });
        }
        if mt.param_types.len() != c.args.len() {
            return Err(CheckError::ArityMismatch {
                what: format!("arguments of {}", c.method),
                expected: mt.param_types.len(),
                found: c.args.len(),
            });
        }
        let s = Subst::from_pairs(mt.type_params.iter().map(|(x, _)| x.clone()).zip(c.targs.iter().cloned()));
        for (t, (_, u)) in c.targs.iter().zip(&mt.type_params) {
            let u = s.ty(u);
            if !self.subtype(phi, t, &u)? {
                return Err(CheckError::BoundViolation { ty: show_type(t), bound: show_type(&u) });
            }
        }
        for (i, (a, p)) in c.args.iter().zip(&mt.param_types).enumerate() {
            let ta = self.type_value(phi, gamma, a)?;
            let p = s.ty(p);
            if !self.subtype(phi, &ta, &p)? {
                return Err(CheckError::ArgTypeMismatch {
                    method: c.method.to_string(),
                    index: i,
                    found: show_type(&ta),
                    expected: show_type(&p),
                });
            }
        }
        let raw = s.effect(&mt.effect);
        let effect = self.simplify(phi, &raw)?;
        Ok((Typed { ty: s.ty(&mt.ret), effect }, raw))
    }

    /// `t-handler`: returns the type of the whole `try` and the filter.
    fn type_handler(&self, phi: &TypeEnv, gamma: &Env, body_ty: &Type, h: &Handler) -> CResult<(Type, HandlerFilter)> {
        let mut inner = gamma.clone();
        inner.insert(h.final_var.clone(), body_ty.clone());
        let fin = self.type_expr(phi, &inner, &h.final_expr)?;
        let mut filters = Vec::new();
        let mut stop_types = Vec::new();
        let mut continue_checks = Vec::new();
        for c in &h.clauses {
            let (f, body_ty, ret, cphi) = self.type_clause(phi, gamma, c)?;
            match c.mode {
                Mode::Stop => stop_types.push((body_ty, cphi)),
                Mode::Continue => continue_checks.push((body_ty, ret, cphi)),
            }
            filters.push(f);
        }
        for (t, ret, cphi) in continue_checks {
            rule("t-continue", || {
                if self.subtype(&cphi, &t, &ret)? {
                    Ok(())
                } else {
                    Err(CheckError::ClauseTypeMismatch(format!(
                        "continue clause returns {}, operation expects {}",
                        show_type(&t),
                        show_type(&ret)
                    )))
                }
            })?;
        }
        let result = rule("t-stop", || self.handler_type(phi, &fin.ty, &stop_types))?;
        Ok((result, HandlerFilter { clauses: filters, final_effect: fin.effect }))
    }

    /// The handler type: the final expression's type unless a stop clause
    /// forces a common supertype, which must then be a declared nominal.
    fn handler_type(&self, phi: &TypeEnv, fin: &Type, stops: &[(Type, TypeEnv)]) -> CResult<Type> {
        let mut candidates = vec![fin.clone()];
        candidates.extend(stops.iter().map(|(t, _)| t.clone()));
        let fits = |c: &Type| -> CResult<bool> {
            if !self.subtype(phi, fin, c)? {
                return Ok(false);
            }
            for (t, cphi) in stops {
                if !self.subtype(cphi, t, c)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        for c in &candidates {
            if fits(c)? {
                return Ok(c.clone());
            }
        }
        if let Type::Obj(o) = fin {
            let mut queue: std::collections::VecDeque<NominalType> = o.parents.iter().cloned().collect();
            let mut seen = BTreeSet::new();
            while let Some(n) = queue.pop_front() {
                if !seen.insert(n.clone()) {
                    continue;
                }
                let t = Type::nominal(n.clone());
                if fits(&t)? {
                    return Ok(t);
                }
                if let Some(ps) = self.program.parents_of(&n) {
                    queue.extend(ps);
                }
            }
        }
        Err(CheckError::ClauseTypeMismatch(format!(
            "no declared common supertype of {} and the stop clause results",
            show_type(fin)
        )))
    }

    /// Types a clause body; returns its filter, body type, the operation's
    /// return type and the type environment the clause was checked in.
    fn type_clause(&self, phi: &TypeEnv, gamma: &Env, c: &Clause) -> CResult<(ClauseFilter, Type, Type, TypeEnv)> {
        let rule_name = match c.mode {
            Mode::Continue => "t-continue",
            Mode::Stop => "t-stop",
        };
        rule(rule_name, || {
            let nt = Type::nominal(c.ntype.clone());
            let (kind, mt) = self.mtype(phi, &nt, &c.method)?;
            if kind != MethodKind::Mgc {
                return Err(CheckError::NotMagicClause {
                    ntype: show_type(&nt),
                    method: c.method.to_string(),
                });
            }
            if mt.type_params.len() != c.type_params.len() {
                return Err(CheckError::ArityMismatch {
                    what: format!("type parameters of clause {}", c.method),
                    expected: mt.type_params.len(),
                    found: c.type_params.len(),
                });
            }
            if mt.param_types.len() != c.params.len() {
                return Err(CheckError::ArityMismatch {
                    what: format!("parameters of clause {}", c.method),
                    expected: mt.param_types.len(),
                    found: c.params.len(),
                });
            }
            let named = MethodTypeEffect {
                type_params: c.type_params.iter().map(|x| (x.clone(), Type::object())).collect(),
                param_types: Vec::new(),
                ret: Type::object(),
                effect: Effect::Empty,
            };
            let (names, _, mt) = align(&named, &mt).expect("arity checked");
            debug_assert_eq!(names.len(), c.type_params.len());
            // Clause bodies may mention the operation's type parameters.
            let rename = Subst::from_pairs(c.type_params.iter().cloned().zip(names.iter().map(|n| Type::Var(n.clone()))));
            let cphi = extend_phi(phi, &mt.type_params);
            let mut inner = gamma.clone();
            inner.insert(c.self_var.clone(), nt.clone());
            for (x, t) in c.params.iter().zip(&mt.param_types) {
                inner.insert(x.clone(), t.clone());
            }
            let body = rename.expr(&c.body);
            let got = self.type_expr(&cphi, &inner, &body)?;
            let filter = ClauseFilter {
                ntype: c.ntype.clone(),
                method: c.method.clone(),
                type_params: mt.type_params.clone(),
                effect: got.effect,
                mode: c.mode,
            };
            Ok((filter, got.ty, mt.ret, cphi))
        })
    }

    /// Type every declaration and `main`; an empty result means well-typed.
    pub fn check_program(&self, main: Option<&Expr>) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        take_failure_trace();
        if let Some(n) = self.program.inheritance_cycle() {
            out.push(diag(&CheckError::CyclicInheritance(n.to_string()), n.to_string(), vec!["t-prog"]));
            return out;
        }
        for d in self.program.decls.values() {
            let mut loc = d.name.to_string();
            let r = rule("t-prog", || rule("t-ntype", || self.check_decl(d, &mut loc)));
            if let Err(e) = r {
                out.push(diag(&e, loc, take_failure_trace()));
            }
        }
        if let Some(m) = main {
            if let Err(e) = self.type_expr(&Vec::new(), &Env::new(), m) {
                out.push(diag(&e, "main".into(), take_failure_trace()));
            }
        }
        out
    }

    /// Checks one declaration; `loc` names the method being checked on failure.
    fn check_decl(&self, d: &TypeDecl, loc: &mut String) -> CResult<()> {
        self.decl_sig(&d.name)?;
        let phi: TypeEnv = d.type_params.clone();
        let self_ty =
            Type::nominal(NominalType::new(d.name.clone(), d.type_params.iter().map(|(y, _)| Type::Var(y.clone())).collect()));
        rule("t-meths", || {
            for (m, md) in &d.methods {
                *loc = format!("{}.{m}", d.name);
                self.check_method(&phi, &Env::new(), &self_ty, m, md)?;
            }
            Ok(())
        })
    }

    /// Like [`Checker::check_program`] on a parsed file, with source positions.
    pub fn check_source(&self, src: &Source) -> Vec<Diagnostic> {
        let mut ds = self.check_program(src.main.as_ref());
        for d in &mut ds {
            let k = d.loc.as_str();
            let pos = src.locations.get(k).or_else(|| src.locations.get(k.split('.').next().unwrap_or(k)));
            if let Some(&(line, col)) = pos {
                d.line = Some(line);
                d.col = Some(col);
            }
        }
        ds
    }

    /// Replace non-simplified effect annotations of declared methods by
    /// their simplification. Returns the rewritten program and warnings.
    pub fn simplify_annotations(&self) -> (Program, Vec<String>) {
        let mut prog = self.program.clone();
        let mut warnings = Vec::new();
        for d in prog.decls.values_mut() {
            for (m, md) in d.methods.iter_mut() {
                if md.kind == MethodKind::Mgc {
                    continue;
                }
                let phi = extend_phi(&d.type_params, &md.mt.type_params);
                let Ok(s) = self.simplify(&phi, &md.mt.effect) else { continue };
                if !EffectNF::of(&s).same(&EffectNF::of(&md.mt.effect)) {
                    warnings.push(format!(
                        "{}.{m}: effect {} simplified to {}",
                        d.name,
                        show_effect(&md.mt.effect),
                        show_effect(&s)
                    ));
                    md.mt.effect = s;
                }
            }
        }
        (prog, warnings)
    }
}

fn diag(e: &CheckError, loc: String, trace: Vec<&'static str>) -> Diagnostic {
    Diagnostic {
        code: e.code().to_string(),
        rule: trace.last().copied().unwrap_or("t-prog").to_string(),
        loc,
        msg: e.to_string(),
        trace: trace.into_iter().map(String::from).collect(),
        line: None,
        col: None,
    }
}
