//! Brute-force checks that an interpretation is one: naturality,
//! monotonicity in the effect, unit, and multiplication, on the base set
//! `{0, 1, 2}` with every subset as predicate.
//!
//! Monadic values are built with the real monad operations, so a faulty
//! `bind` shows up here too. Nested values `M(M X)` are outer values over
//! indices into a table of inner values, and `μ` is bind with the lookup.

use num_rational::BigRational;
use serde::Serialize;

use super::interp::{holds, Denoter, Interp, CHOICE};
use crate::ast::*;
use crate::monads::{Dist, Exc, ExcMap, List, Ordered, Shape};
use crate::signatures::Checker;
use crate::syntax::pretty::show_effect;

const BASE: u8 = 3;
const MAX_WITNESSES: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
    pub witnesses: Vec<String>,
}

impl Condition {
    fn new(name: &'static str) -> Self {
        Condition { name, checked: 0, violations: 0, witnesses: Vec::new() }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub interp: Interp,
    pub effects: Vec<String>,
    /// Naturality, monotonicity, unit, multiplication, then bottom.
    pub conditions: Vec<Condition>,
}

impl LawReport {
    /// Condition `i` of the definition, counting from 1.
    pub fn condition(&self, i: usize) -> &Condition {
        &self.conditions[i - 1]
    }

    pub fn passed(&self) -> bool {
        self.conditions.iter().all(Condition::passed)
    }
}

fn subsets() -> impl Iterator<Item = u8> {
    0..(1u8 << BASE)
}

fn member(a: u8, x: u8) -> bool {
    a & (1 << x) != 0
}

fn show_set(a: u8) -> String {
    let xs: Vec<String> = (0..BASE).filter(|&x| member(a, x)).map(|x| x.to_string()).collect();
    format!("{{{}}}", xs.join(", "))
}

fn functions() -> Vec<[u8; BASE as usize]> {
    let mut out = Vec::new();
    for a in 0..BASE {
        for b in 0..BASE {
            for c in 0..BASE {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn lists(max_len: usize, alphabet: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &layer {
            for x in 0..alphabet {
                let mut l2: Vec<usize> = l.clone();
                l2.push(x);
                next.push(l2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Sub-distributions over `alphabet` points with weights in quarters.
fn dists(alphabet: usize, quarters: bool) -> Vec<Vec<(usize, BigRational)>> {
    let steps: Vec<i64> = if quarters { vec![0, 1, 2, 3, 4] } else { vec![0, 2, 4] };
    let mut out: Vec<Vec<(usize, BigRational)>> = vec![Vec::new()];
    let mut totals = vec![0i64];
    for x in 0..alphabet {
        let mut next = Vec::new();
        let mut next_totals = Vec::new();
        for (d, t) in out.iter().zip(&totals) {
            for &s in &steps {
                if t + s > 4 {
                    continue;
                }
                let mut d2 = d.clone();
                if s > 0 {
                    d2.push((x, q(s, 4)));
                }
                next.push(d2);
                next_totals.push(t + s);
            }
        }
        out = next;
        totals = next_totals;
    }
    out
}

/// Sample values of `M X` over `alphabet` points, as shapes.
fn samples(monad: &str, alphabet: usize, excs: &[Name], nested: bool) -> Vec<Shape<usize>> {
    match monad {
        "exc" => {
            let mut out: Vec<Shape<usize>> = (0..alphabet).map(Shape::Value).collect();
            out.extend(excs.iter().cloned().map(Shape::Raised));
            out.push(Shape::Bottom);
            out
        }
        "list" => lists(if nested { 2 } else { 3 }, alphabet)
            .into_iter()
            .map(|items| Shape::List { items, exhausted: true })
            .collect(),
        "dist" => {
            if nested {
                // Point masses, even pairs and the empty distribution.
                let mut out = vec![Shape::Dist(Vec::new())];
                for i in 0..alphabet {
                    out.push(Shape::Dist(vec![(i, q(1, 1))]));
                    for j in i + 1..alphabet {
                        out.push(Shape::Dist(vec![(i, q(1, 2)), (j, q(1, 2))]));
                    }
                }
                out
            } else {
                dists(alphabet, true).into_iter().map(Shape::Dist).collect()
            }
        }
        _ => Vec::new(),
    }
}

fn nested_inner(monad: &str, excs: &[Name]) -> Vec<Shape<usize>> {
    match monad {
        "list" => samples(monad, BASE as usize, excs, true),
        "dist" => {
            let mut out = samples(monad, BASE as usize, excs, true);
            out.extend((0..BASE as usize).map(|i| Shape::Dist(vec![(i, q(1, 2))])));
            out
        }
        _ => samples(monad, BASE as usize, excs, false),
    }
}

/// Effects to sample: everything the program declares among a fixed
/// vocabulary, filtered by what the interpretation can read.
fn effect_samples(program: &Program, den: &Denoter, interp: Interp) -> Vec<Effect> {
    let nat = || Type::plain("Nat");
    let atom = |recv: Type, m: &str, targs: Vec<Type>| Effect::atom(recv, name(m), targs);
    let mut atoms = Vec::new();
    if program.decl("Nat").is_some() {
        for n in ["Exception", "MyException"] {
            if program.decl(n).is_some() {
                atoms.push(atom(Type::plain(n), "throw", vec![nat()]));
            }
        }
        if program.decl("Failure").is_some() {
            atoms.push(atom(Type::nominal(NominalType::new(name("Failure"), vec![nat()])), "fail", vec![]));
        }
    }
    if program.decl(CHOICE.0).is_some() {
        atoms.push(atom(Type::plain(CHOICE.0), CHOICE.1, vec![]));
    }
    let mut out = vec![Effect::Empty, Effect::Top];
    out.extend(atoms.iter().cloned());
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            out.push(Effect::union(a.clone(), b.clone()));
        }
    }
    out.retain(|e| den.denote(interp, e).is_ok());
    out
}

pub fn interp_law_suite(interp: Interp, program: &Program) -> LawReport {
    match interp.monad() {
        "exc" => suite::<Exc>(interp, program),
        "list" => suite::<List>(interp, program),
        _ => suite::<Dist>(interp, program),
    }
}

fn suite<M: Ordered>(interp: Interp, program: &Program) -> LawReport {
    let den = Denoter::new(program, ExcMap::default());
    let checker = Checker::new(program);
    let effects = effect_samples(program, &den, interp);
    let dens: Vec<_> = effects.iter().map(|e| den.denote(interp, e).expect("filtered")).collect();
    let show_e = |i: usize| show_effect(&effects[i]);
    let mut excs: Vec<Name> = den.exception_nominals().into_iter().map(|d| ExcMap::default().of_name(d)).collect();
    excs.dedup();
    let build = |s: &Shape<usize>| M::from_shape(s.clone()).expect("sample belongs to the monad");
    let observe = |m: &M::M<usize>| M::shape(m, usize::MAX);
    let show = |s: &Shape<usize>| s.display(|x| x.to_string());

    let base: Vec<M::M<usize>> = samples(M::NAME, BASE as usize, &excs, false).iter().map(build).collect();
    let mut c1 = Condition::new("naturality");
    let mut c2 = Condition::new("monotonicity");
    let mut c3 = Condition::new("unit");
    let mut c4 = Condition::new("multiplication");
    let mut c5 = Condition::new("bottom");

    for f in functions() {
        let mapped: Vec<Shape<usize>> = base.iter().map(|m| observe(&M::map(m, move |&x| f[x] as usize))).collect();
        for (m, fm) in base.iter().zip(&mapped) {
            let m = observe(m);
            for a in subsets() {
                for (i, d) in dens.iter().enumerate() {
                    let lhs = holds(interp, d, &m, &|&x| member(a, f[x]));
                    let rhs = holds(interp, d, fm, &|&x| member(a, x as u8));
                    c1.record(lhs == rhs, || {
                        format!("f = {f:?}, A = {}, effect {}, m = {}", show_set(a), show_e(i), show(&m))
                    });
                }
            }
        }
    }

    let order: Vec<Vec<bool>> = effects
        .iter()
        .map(|a| effects.iter().map(|b| checker.subeffect(&Vec::new(), a, b).unwrap_or(false)).collect())
        .collect();
    let base_shapes: Vec<Shape<usize>> = base.iter().map(observe).collect();
    for (i, j) in (0..effects.len()).flat_map(|i| (0..effects.len()).map(move |j| (i, j))) {
        if !order[i][j] {
            continue;
        }
        for m in &base_shapes {
            for a in subsets() {
                let p = |x: &usize| member(a, *x as u8);
                let ok = !holds(interp, &dens[i], m, &p) || holds(interp, &dens[j], m, &p);
                c2.record(ok, || format!("{} <= {}, A = {}, m = {}", show_e(i), show_e(j), show_set(a), show(m)));
            }
        }
    }

    let pure = den.denote(interp, &Effect::Empty).expect("pure always has a reading");
    for a in subsets() {
        for x in (0..BASE).filter(|&x| member(a, x)) {
            let m = observe(&M::unit(x as usize));
            c3.record(holds(interp, &pure, &m, &|y| member(a, *y as u8)), || {
                format!("A = {}, x = {x}, unit(x) = {}", show_set(a), show(&m))
            });
        }
    }

    let inner: Vec<Shape<usize>> = nested_inner(M::NAME, &excs);
    let inner_m: Vec<M::M<usize>> = inner.iter().map(build).collect();
    let outer = samples(M::NAME, inner.len(), &excs, true);
    for mm in &outer {
        let table = inner_m.clone();
        let flat = observe(&M::bind(&build(mm), move |&k| table[k].clone()));
        for (i, j) in (0..effects.len()).flat_map(|i| (0..effects.len()).map(move |j| (i, j))) {
            let joined = den.denote(interp, &Effect::union(effects[i].clone(), effects[j].clone())).expect("union of readable effects");
            for a in subsets() {
                let p = |x: &usize| member(a, *x as u8);
                let premise = holds(interp, &dens[i], mm, &|k: &usize| holds(interp, &dens[j], &inner[*k], &p));
                let ok = !premise || holds(interp, &joined, &flat, &p);
                c4.record(ok, || {
                    let mm_s = mm.display(|k| show(&inner[*k]));
                    format!("outer {}, inner {}, A = {}, mm = {mm_s}, mu(mm) = {}", show_e(i), show_e(j), show_set(a), show(&flat))
                });
            }
        }
    }

    let bottom = observe(&M::bottom());
    for (i, d) in dens.iter().enumerate() {
        for a in subsets() {
            c5.record(holds(interp, d, &bottom, &|x: &usize| member(a, *x as u8)), || {
                format!("effect {}, A = {}", show_e(i), show_set(a))
            });
        }
    }

    LawReport {
        interp,
        effects: effects.iter().map(show_effect).collect(),
        conditions: vec![c1, c2, c3, c4, c5],
    }
}
