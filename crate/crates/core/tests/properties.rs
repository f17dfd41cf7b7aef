//! Structural properties of syntax, signatures, effects, typing and
//! reduction, checked on the example corpus and on generated inputs.

mod common;

use common::*;
use mfj_core::effects::{effect_eq, ClauseFilter, HandlerFilter};
use mfj_core::evaluator::Machine;
use mfj_core::monads::{shape_eq, shape_leq, Dist, Exc, List, Monad};
use mfj_core::reducer::{mbody, pure_step, Lookup};
use mfj_core::subst::{alpha_eq_expr, alpha_hash_expr, canon_expr, AlphaKey, Subst};
use mfj_core::syntax::parse_effect;
use mfj_core::*;
use proptest::prelude::*;

fn corpus() -> Vec<(String, Source)> {
    corpus_files()
        .iter()
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().to_string();
            let src = load(&stem);
            (stem, src)
        })
        .collect()
}

/// Every expression reached while running `main` in the exception monad.
fn reached(src: &Source, fuel: usize) -> Vec<Expr> {
    let m = machine::<Exc>(src);
    let mut out = Vec::new();
    for mc in m.run_configs(src.main.as_ref().unwrap(), fuel) {
        for c in Exc::shape(&mc, 16).support() {
            if let mfj_core::evaluator::Config::Exp(e) = c {
                out.push(e.clone());
            }
        }
    }
    out
}

/// Declarations agree up to the names of bound self and parameter variables.
fn assert_same_decls(file: &str, a: &Program, b: &Program) {
    assert_eq!(a.decls.keys().collect::<Vec<_>>(), b.decls.keys().collect::<Vec<_>>(), "{file}");
    for (n, da) in &a.decls {
        let db = &b.decls[n];
        assert_eq!((&da.type_params, &da.parents), (&db.type_params, &db.parents), "{file}: {n}");
        assert_eq!(da.methods.keys().collect::<Vec<_>>(), db.methods.keys().collect::<Vec<_>>(), "{file}: {n}");
        for (m, ma) in &da.methods {
            let mb = &db.methods[m];
            assert_eq!((ma.kind, &ma.mt), (mb.kind, &mb.mt), "{file}: {n}.{m}");
            match (&ma.body, &mb.body) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    assert_eq!(x.params.len(), y.params.len(), "{file}: {n}.{m}");
                    let mut s = Subst::new();
                    s.add_value(y.self_var.clone(), Value::Var(x.self_var.clone()));
                    for (p, q) in x.params.iter().zip(&y.params) {
                        s.add_value(q.clone(), Value::Var(p.clone()));
                    }
                    assert!(alpha_eq_expr(&x.expr, &s.expr(&y.expr)), "{file}: {n}.{m} body differs");
                }
                _ => panic!("{file}: {n}.{m}: body appeared or vanished"),
            }
        }
    }
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for (name, src) in corpus() {
        let printed = Printer::plain().source(&src);
        let again = parse_source(&printed).unwrap_or_else(|e| panic!("{name}: reparse failed: {e}\n{printed}"));
        assert_same_decls(&name, &src.program, &again.program);
        match (&src.main, &again.main) {
            (Some(a), Some(b)) => assert!(alpha_eq_expr(a, b), "{name}: main differs"),
            (None, None) => {}
            _ => panic!("{name}: main appeared or vanished"),
        }
        assert_eq!(printed, Printer::plain().source(&again), "{name}: printing is not stable");
    }
}

#[test]
fn identity_substitution_changes_nothing() {
    let s = Subst::new();
    for (name, src) in corpus() {
        for e in reached(&src, 200) {
            assert_eq!(s.expr(&e), e, "{name}");
        }
    }
}

#[test]
fn alpha_keys_agree_with_alpha_equivalence() {
    let aliases = prelude().aliases;
    let a = syntax::parse_expr("do x = Zero.succ(); do y = x.succ(); return y", &aliases).unwrap();
    let b = syntax::parse_expr("do u = Zero.succ(); do v = u.succ(); return v", &aliases).unwrap();
    let c = syntax::parse_expr("do u = Zero.succ(); do v = u.succ(); return u", &aliases).unwrap();
    assert!(alpha_eq_expr(&a, &b));
    assert_eq!(AlphaKey::new(&a), AlphaKey::new(&b));
    assert_eq!(alpha_hash_expr(&a), alpha_hash_expr(&b));
    assert_eq!(canon_expr(&a), canon_expr(&b));
    assert!(!alpha_eq_expr(&a, &c));
    assert_ne!(AlphaKey::new(&a), AlphaKey::new(&c));
}

/// Types of the corpus worth comparing: declared nominals, a few
/// instantiations, erased objects and `Object`.
fn sample_types(src: &Source) -> Vec<Type> {
    let mut out = vec![Type::object()];
    for d in src.program.decls.values() {
        if d.type_params.is_empty() {
            out.push(Type::plain(&d.name));
        }
    }
    for t in ["ThenElse[Nat]", "NatMatch[Bool]", "Failure[Nat]", "ThenElse[Bool]"] {
        out.push(syntax::parse_type(t, &src.aliases).unwrap());
    }
    for (_, v) in &src.aliases.values {
        if let Value::Obj(o) = v {
            out.push(Type::Obj(erase(o)));
        }
    }
    out
}

#[test]
fn subtyping_is_reflexive_and_transitive() {
    let src = load("effect_poly");
    let c = Checker::new(&src.program);
    let ts = sample_types(&src);
    let phi = Vec::new();
    let le: Vec<Vec<bool>> =
        ts.iter().map(|a| ts.iter().map(|b| c.subtype(&phi, a, b).unwrap_or(false)).collect()).collect();
    for i in 0..ts.len() {
        assert!(le[i][i], "{} is not a subtype of itself", Printer::plain().ty(&ts[i]));
        for j in 0..ts.len() {
            for k in 0..ts.len() {
                if le[i][j] && le[j][k] {
                    assert!(le[i][k], "transitivity fails at {:?}", (&ts[i], &ts[j], &ts[k]));
                }
            }
        }
    }
}

fn nominal_sigs(src: &Source) -> Vec<Signature> {
    let c = Checker::new(&src.program);
    src.program.decls.values().filter(|d| d.type_params.is_empty()).filter_map(|d| c.decl_sig(&d.name).ok()).collect()
}

#[test]
fn signature_sums_are_commutative_and_have_units() {
    let src = load("mixin");
    let c = Checker::new(&src.program);
    let phi = Vec::new();
    let sigs = nominal_sigs(&src);
    for a in &sigs {
        assert_eq!(c.override_sum(&phi, a.clone(), &Signature::new()).ok().as_ref(), Some(a));
        assert_eq!(c.override_sum(&phi, Signature::new(), a).ok().as_ref(), Some(a));
        for b in &sigs {
            let ab = c.sym_sum(&phi, a.clone(), b.clone());
            let ba = c.sym_sum(&phi, b.clone(), a.clone());
            if let (Ok(ab), Ok(ba)) = (&ab, &ba) {
                assert_eq!(ab, ba);
            } else {
                assert_eq!(ab.is_ok(), ba.is_ok(), "definedness of the sum is not symmetric");
            }
        }
    }
}

#[test]
fn symmetric_sum_is_associative_where_defined() {
    let src = load("mixin");
    let c = Checker::new(&src.program);
    let phi = Vec::new();
    let sigs = nominal_sigs(&src);
    let small: Vec<&Signature> = sigs.iter().filter(|s| s.len() <= 3).take(8).collect();
    for a in &small {
        for b in &small {
            for d in &small {
                let left = c.sym_sum(&phi, (*a).clone(), (*b).clone()).and_then(|ab| c.sym_sum(&phi, ab, (*d).clone()));
                let right = c.sym_sum(&phi, (*b).clone(), (*d).clone()).and_then(|bd| c.sym_sum(&phi, (*a).clone(), bd));
                if let (Ok(l), Ok(r)) = (left, right) {
                    assert_eq!(l, r);
                }
            }
        }
    }
}

#[test]
fn mtype_agrees_with_mbody() {
    for (name, src) in corpus() {
        let c = Checker::new(&src.program);
        let mut values: Vec<Value> = src.aliases.values.iter().map(|(_, v)| v.clone()).collect();
        values.extend(src.program.decls.values().filter(|d| d.type_params.is_empty()).map(|d| Value::plain(&d.name)));
        for v in values {
            let Value::Obj(o) = &v else { continue };
            let t = Type::Obj(erase(o));
            let mut methods: Vec<Name> = o.methods.keys().cloned().collect();
            for p in &o.parents {
                if let Some(d) = src.program.decl(&p.name) {
                    methods.extend(d.methods.keys().cloned());
                }
            }
            for m in methods {
                if let Ok(Lookup::Def { type_params, params, .. }) = mbody(&src.program, &v, &m) {
                    let (kind, mt) = c.mtype(&Vec::new(), &t, &m).unwrap_or_else(|e| panic!("{name}: {m}: {e}"));
                    assert_eq!(kind, MethodKind::Def, "{name}: {m}");
                    assert_eq!(mt.type_params.len(), type_params.len(), "{name}: {m}");
                    assert_eq!(mt.param_types.len(), params.len(), "{name}: {m}");
                }
            }
        }
    }
}

#[test]
fn magic_entries_carry_their_canonical_effect() {
    let src = prelude();
    let c = Checker::new(&src.program);
    for d in src.program.decls.values() {
        let sig = c.decl_sig(&d.name).unwrap();
        let self_ty = Type::nominal(NominalType::new(
            d.name.clone(),
            d.type_params.iter().map(|(y, _)| Type::Var(y.clone())).collect(),
        ));
        for (m, e) in &sig {
            if e.kind == MethodKind::Mgc {
                let xs = e.mt.type_params.iter().map(|(x, _)| Type::Var(x.clone())).collect();
                assert_eq!(e.mt.effect, Effect::atom(self_ty.clone(), m.clone(), xs), "{}.{m}", d.name);
            }
        }
    }
}

const ATOMS: [&str; 5] = ["Exception.throw[Nat]", "MyException.throw[Nat]", "Failure[Nat].fail", "Chooser.choose", "String.toNat"];

fn effect_of(bits: u8, top: bool) -> Effect {
    if top {
        return Effect::Top;
    }
    let aliases = prelude().aliases;
    Effect::union_all((0..ATOMS.len()).filter(|i| bits & (1 << i) != 0).map(|i| parse_effect(ATOMS[i], &aliases).unwrap()))
}

fn effect_strategy() -> impl Strategy<Value = Effect> {
    (0u8..32, prop::bool::weighted(0.1)).prop_map(|(b, t)| effect_of(b, t))
}

fn handler(clause_effect: Effect, final_effect: Effect, mode: Mode) -> HandlerFilter {
    HandlerFilter {
        clauses: vec![ClauseFilter {
            ntype: NominalType::plain("Exception"),
            method: name("throw"),
            type_params: vec![(name("X"), Type::object())],
            effect: clause_effect,
            mode,
        }],
        final_effect,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effect_union_is_a_semilattice(a in effect_strategy(), b in effect_strategy(), c in effect_strategy()) {
        let u = Effect::union;
        prop_assert!(effect_eq(&u(a.clone(), b.clone()), &u(b.clone(), a.clone())));
        prop_assert!(effect_eq(&u(u(a.clone(), b.clone()), c.clone()), &u(a.clone(), u(b.clone(), c.clone()))));
        prop_assert!(effect_eq(&u(a.clone(), a.clone()), &a));
        prop_assert!(effect_eq(&u(a.clone(), Effect::Empty), &a));
        prop_assert!(effect_eq(&u(a.clone(), Effect::Top), &Effect::Top));
    }

    #[test]
    fn simplification_is_idempotent_and_monotone(a in effect_strategy(), b in effect_strategy()) {
        let src = prelude();
        let c = Checker::new(&src.program);
        let phi = Vec::new();
        let sa = c.simplify(&phi, &a).unwrap();
        prop_assert!(effect_eq(&c.simplify(&phi, &sa).unwrap(), &sa));
        let ab = Effect::union(a.clone(), b);
        let sab = c.simplify(&phi, &ab).unwrap();
        prop_assert!(c.subeffect(&phi, &sa, &sab).unwrap());
    }

    #[test]
    fn filters_compose(a in effect_strategy(), b in effect_strategy(), ce in effect_strategy(), fe in effect_strategy(), stop in any::<bool>()) {
        let src = prelude();
        let c = Checker::new(&src.program);
        let phi = Vec::new();
        let mode = if stop { Mode::Stop } else { Mode::Continue };
        let h = handler(ce.clone(), fe, mode);
        let lhs = c.apply_filter(&phi, &h, &Effect::union(a.clone(), b.clone())).unwrap();
        let inner = c.apply_filter(&phi, &h, &b).unwrap();
        let rhs = c.apply_filter(&phi, &handler(ce, inner, mode), &a).unwrap();
        prop_assert!(effect_eq(&lhs, &rhs), "{} vs {}", Printer::plain().effect(&lhs), Printer::plain().effect(&rhs));
    }

    #[test]
    fn filters_are_monotone(a in effect_strategy(), extra in effect_strategy(), ce in effect_strategy(), fe in effect_strategy(), fe_extra in effect_strategy()) {
        let src = prelude();
        let c = Checker::new(&src.program);
        let phi = Vec::new();
        let small = c.apply_filter(&phi, &handler(ce.clone(), fe.clone(), Mode::Stop), &a).unwrap();
        let big = c
            .apply_filter(&phi, &handler(ce, Effect::union(fe, fe_extra), Mode::Stop), &Effect::union(a, extra))
            .unwrap();
        prop_assert!(c.subeffect(&phi, &small, &big).unwrap());
    }
}

/// Atoms left after simplification are magic or on type variables.
fn is_simplified(c: &Checker, e: &Effect) -> bool {
    match e {
        Effect::Empty | Effect::Top => true,
        Effect::Union(a, b) => is_simplified(c, a) && is_simplified(c, b),
        Effect::Call(a) => match &a.recv {
            Type::Var(_) => true,
            t => matches!(c.mtype(&Vec::new(), t, &a.method), Ok((MethodKind::Mgc, _))),
        },
    }
}

#[test]
fn typing_is_deterministic_simplified_and_inverts_on_return() {
    for (name, src) in corpus() {
        let c = Checker::new(&src.program);
        if !c.check_program(src.main.as_ref()).is_empty() {
            continue;
        }
        for e in reached(&src, 200) {
            let t1 = c.type_expr(&Vec::new(), &Env::new(), &e);
            let t2 = Checker::new(&src.program).type_expr(&Vec::new(), &Env::new(), &e);
            assert_eq!(t1, t2, "{name}: typing is not a function");
            let Ok(t) = t1 else { continue };
            assert!(is_simplified(&c, &t.effect), "{name}: {} is not simplified", Printer::plain().effect(&t.effect));
            if let Expr::Return(v) = &e {
                assert!(effect_eq(&t.effect, &Effect::Empty), "{name}: return has an effect");
                assert_eq!(c.type_value(&Vec::new(), &Env::new(), v).unwrap(), t.ty, "{name}");
            }
        }
    }
}

#[test]
fn widening_the_context_weakens_the_result() {
    let src = prelude();
    let c = Checker::new(&src.program);
    let phi = Vec::new();
    let cases = [
        ("do y = x.succ(); return y", "Zero", "Nat"),
        ("x.match[Bool](Even)", "Zero", "Nat"),
        ("x.not()", "True", "Bool"),
        ("return x", "Succ", "Nat"),
    ];
    for (text, narrow, wide) in cases {
        let e = syntax::parse_expr(text, &src.aliases).unwrap();
        let at = |ty: &str| {
            let mut g = Env::new();
            g.insert(name("x"), syntax::parse_type(ty, &src.aliases).unwrap());
            c.type_expr(&phi, &g, &e).unwrap_or_else(|err| panic!("{text} at {ty}: {err}"))
        };
        let (n, w) = (at(narrow), at(wide));
        assert!(c.subtype(&phi, &n.ty, &w.ty).unwrap(), "{text}");
        assert!(c.subeffect(&phi, &n.effect, &w.effect).unwrap(), "{text}");
    }
}

fn is_fine_grain(e: &Expr) -> bool {
    match e {
        Expr::Call(_) | Expr::Return(_) => true,
        Expr::Do(_, a, b) => is_fine_grain(a) && is_fine_grain(b),
        Expr::Try(b, h) => is_fine_grain(b) && is_fine_grain(&h.final_expr) && h.clauses.iter().all(|c| is_fine_grain(&c.body)),
    }
}

#[test]
fn pure_steps_are_deterministic_fine_grain_and_stuck_where_expected() {
    for (name, src) in corpus() {
        let p = &src.program;
        for e in reached(&src, 200) {
            let a = pure_step(p, &e);
            let b = pure_step(p, &e);
            assert_eq!(a, b, "{name}");
            match (&e, a) {
                (_, Some((_, e2))) => assert!(is_fine_grain(&e2), "{name}"),
                (Expr::Return(_) | Expr::Do(..), None) => {}
                (Expr::Call(c), None) => {
                    assert!(!matches!(mbody(p, &c.recv, &c.method), Ok(Lookup::Def { .. })), "{name}: stuck on a defined call")
                }
                (Expr::Try(..), None) => panic!("{name}: try blocks around steppable bodies always step"),
            }
            if matches!(e, Expr::Return(_) | Expr::Do(..)) {
                assert!(pure_step(p, &e).is_none(), "{name}");
            }
        }
    }
}

fn chain_checks<M: mfj_core::monads::Ordered>(name: &str, src: &Source) {
    let m: Machine<M> = machine::<M>(src);
    let main = src.main.as_ref().unwrap();
    let chain: Vec<_> = m.approx_chain(main, 64).iter().map(|x| M::shape(x, 256)).collect();
    for (i, w) in chain.windows(2).enumerate() {
        assert!(shape_leq(&w[0], &w[1]), "{name} in {}: approximation {} is not below {}", M::NAME, i, i + 1);
    }
    if let Some((res, steps)) = run::<M>(src, 64) {
        assert!(shape_eq(&res, &M::shape(&m.infinitary_approx(main, steps), 256)), "{name} in {}", M::NAME);
    }
}

#[test]
fn approximations_ascend_and_meet_finite_results() {
    for (name, src) in corpus() {
        chain_checks::<Exc>(&name, &src);
        chain_checks::<List>(&name, &src);
        chain_checks::<Dist>(&name, &src);
    }
}

#[test]
fn monadic_steps_are_deterministic() {
    for (name, src) in corpus() {
        let m = machine::<List>(&src);
        for e in reached(&src, 100) {
            let a = m.mon_step(&e).map(|(r, x)| (r, List::shape(&x, 64)));
            let b = m.mon_step(&e).map(|(r, x)| (r, List::shape(&x, 64)));
            match (a, b) {
                (Some((ra, xa)), Some((rb, xb))) => {
                    assert_eq!(ra, rb, "{name}");
                    assert!(shape_eq(&xa, &xb), "{name}");
                }
                (None, None) => {}
                _ => panic!("{name}: monadic step is not deterministic"),
            }
        }
    }
}
