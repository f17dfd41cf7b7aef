//! Run functions: what a magic call does in a given monad.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;

use super::{Monad, Shape};
use crate::ast::*;
use crate::reducer::instance_of;

/// `run_N^m(v, v̄)`; `None` where the run function is undefined.
pub type RunFn<M> = Arc<dyn Fn(&Program, &Value, &[Value]) -> Option<<M as Monad>::M<Value>> + Send + Sync>;

/// Exception names for exception objects, keyed by nominal type name.
#[derive(Clone, Debug)]
pub struct ExcMap(pub BTreeMap<Name, Name>);

impl Default for ExcMap {
    fn default() -> Self {
        ExcMap(BTreeMap::from([
            (name("Exception"), name("E")),
            (name("MyException"), name("MyE")),
            (name("Failure"), name("Fail")),
        ]))
    }
}

impl ExcMap {
    /// The exception raised by throwing from a type named `n`: its entry,
    /// or the type name itself when unmapped.
    pub fn of_name(&self, n: &str) -> Name {
        self.0.get(n).cloned().unwrap_or_else(|| name(n))
    }

    /// `exc(v)`, decided by the most derived nominal parent of `v`.
    pub fn of_value(&self, p: &Program, v: &Value) -> Option<Name> {
        let Value::Obj(o) = v else { return None };
        let mut parents: Vec<&NominalType> = o.parents.iter().collect();
        // Most derived first: a parent below another parent wins.
        parents.sort_by_key(|a| o.parents.iter().filter(|b| p.nominal_sub(a, b)).count());
        parents.last().map(|n| self.of_name(&n.name))
    }
}

pub struct Registry<M: Monad> {
    runs: BTreeMap<(Name, Name), RunFn<M>>,
    pub exc: ExcMap,
}

impl<M: Monad> Clone for Registry<M> {
    fn clone(&self) -> Self {
        Registry { runs: self.runs.clone(), exc: self.exc.clone() }
    }
}

impl<M: Monad> Default for Registry<M> {
    fn default() -> Self {
        Registry { runs: BTreeMap::new(), exc: ExcMap::default() }
    }
}

fn from_shape<M: Monad>(s: Shape<Value>) -> Option<M::M<Value>> {
    M::from_shape(s)
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

impl<M: Monad> Registry<M> {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, n: &str, m: &str, f: RunFn<M>) {
        self.runs.insert((name(n), name(m)), f);
    }

    pub fn get(&self, n: &str, m: &str) -> Option<&RunFn<M>> {
        self.runs.get(&(name(n), name(m)))
    }

    pub fn keys(&self) -> impl Iterator<Item = &(Name, Name)> {
        self.runs.keys()
    }

    /// The standard run functions for this monad.
    pub fn standard() -> Self {
        let mut r = Self::default();
        match M::NAME {
            "exc" => {
                for n in ["Exception", "MyException"] {
                    let exc = r.exc.clone();
                    let target = NominalType::plain(n);
                    r.insert(
                        n,
                        "throw",
                        Arc::new(move |p, v, args| {
                            if !args.is_empty() || !instance_of(p, v, &target) {
                                return None;
                            }
                            from_shape::<M>(Shape::Raised(exc.of_value(p, v)?))
                        }),
                    );
                }
                let fail = r.exc.of_name("Failure");
                r.insert(
                    "Failure",
                    "fail",
                    Arc::new(move |_, v, args| {
                        let is_failure = matches!(v, Value::Obj(o) if o.parents.iter().any(|q| q.name.as_ref() == "Failure"));
                        if !args.is_empty() || !is_failure {
                            return None;
                        }
                        from_shape::<M>(Shape::Raised(fail.clone()))
                    }),
                );
            }
            "list" => r.insert(
                "Chooser",
                "choose",
                Arc::new(|_, _, args| {
                    if !args.is_empty() {
                        return None;
                    }
                    from_shape::<M>(Shape::List { items: vec![Value::plain("True"), Value::plain("False")], exhausted: true })
                }),
            ),
            "dist" => r.insert(
                "Chooser",
                "choose",
                Arc::new(|_, _, args| {
                    if !args.is_empty() {
                        return None;
                    }
                    from_shape::<M>(Shape::Dist(vec![(Value::plain("True"), half()), (Value::plain("False"), half())]))
                }),
            ),
            _ => {}
        }
        r
    }

    /// A registry whose run functions break their declared types: used to
    /// show that the soundness harness notices.
    pub fn corrupted() -> Self {
        let mut r = Self::standard();
        let zero = || Value::plain("Zero");
        match M::NAME {
            "exc" => {
                let e = r.exc.of_name("Exception");
                r.insert("Failure", "fail", Arc::new(move |_, _, _| from_shape::<M>(Shape::Raised(e.clone()))));
            }
            "list" => r.insert(
                "Chooser",
                "choose",
                Arc::new(move |_, _, _| from_shape::<M>(Shape::List { items: vec![zero()], exhausted: true })),
            ),
            "dist" => r.insert(
                "Chooser",
                "choose",
                Arc::new(move |_, _, _| from_shape::<M>(Shape::Dist(vec![(zero(), BigRational::from_integer(1.into()))]))),
            ),
            _ => {}
        }
        r
    }

    /// Registered pairs that the program does not declare as magic.
    pub fn undeclared(&self, p: &Program) -> Vec<(Name, Name)> {
        self.runs
            .keys()
            .filter(|(n, m)| {
                !p.decl(n).and_then(|d| d.methods.get(m)).is_some_and(|md| md.kind == MethodKind::Mgc)
            })
            .cloned()
            .collect()
    }
}
