//! Monads used to interpret effects, and the registry of run functions
//! that give magic methods their meaning.
//!
//! A monad is a zero-sized type implementing [`Monad`]; its values are
//! `M::M<T>`. Every value can be observed as a finite [`Shape`], which is
//! what comparison, ordering and printing work on.

mod dist;
mod exc;
mod list;
pub mod registry;

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

pub use dist::{Dist, DistM};
pub use exc::{Exc, ExcM};
pub use list::{LazyList, List};
pub use registry::{ExcMap, Registry, RunFn};

use crate::ast::Name;
use crate::subst::AlphaKey;

/// Elements stored in monadic values. `key` decides equality, so that
/// α-equivalent terms are merged in distributions and compared equal.
pub trait Elem: Clone + Send + Sync + 'static {
    type Key: Ord + Clone;
    fn key(&self) -> Self::Key;
}

impl Elem for crate::ast::Value {
    type Key = AlphaKey<crate::ast::Value>;
    fn key(&self) -> Self::Key {
        AlphaKey::new(self)
    }
}

impl Elem for crate::ast::Expr {
    type Key = AlphaKey<crate::ast::Expr>;
    fn key(&self) -> Self::Key {
        AlphaKey::new(self)
    }
}

macro_rules! plain_elem {
    ($($t:ty),*) => {$(
        impl Elem for $t {
            type Key = $t;
            fn key(&self) -> $t { self.clone() }
        }
    )*};
}
plain_elem!(u8, u32, u64, usize, bool, String);

impl<A: Elem, B: Elem> Elem for (A, B) {
    type Key = (A::Key, B::Key);
    fn key(&self) -> Self::Key {
        (self.0.key(), self.1.key())
    }
}

/// A finite observation of a monadic value.
#[derive(Clone, Debug)]
pub enum Shape<T> {
    Value(T),
    Raised(Name),
    /// The least element of the exception monad's flat order.
    Bottom,
    List { items: Vec<T>, exhausted: bool },
    Dist(Vec<(T, BigRational)>),
}

impl<T> Shape<T> {
    /// Every element visible in the observation.
    pub fn support(&self) -> Vec<&T> {
        match self {
            Shape::Value(x) => vec![x],
            Shape::Raised(_) | Shape::Bottom => Vec::new(),
            Shape::List { items, .. } => items.iter().collect(),
            Shape::Dist(ws) => ws.iter().map(|(x, _)| x).collect(),
        }
    }

    /// No further elements could show up with a larger observation bound.
    pub fn is_complete(&self) -> bool {
        !matches!(self, Shape::List { exhausted: false, .. })
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Shape<U> {
        match self {
            Shape::Value(x) => Shape::Value(f(x)),
            Shape::Raised(e) => Shape::Raised(e),
            Shape::Bottom => Shape::Bottom,
            Shape::List { items, exhausted } => Shape::List { items: items.into_iter().map(f).collect(), exhausted },
            Shape::Dist(ws) => Shape::Dist(ws.into_iter().map(|(x, w)| (f(x), w)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("not an ascending chain at position {0}")]
pub struct NotAChain(pub usize);

pub trait Monad: Send + Sync + 'static {
    const NAME: &'static str;
    /// Values may hold suspended computations.
    const LAZY: bool = false;
    type M<T: Elem>: Clone + Send + Sync + 'static;

    fn unit<T: Elem>(x: T) -> Self::M<T>;

    fn bind<T: Elem, U: Elem>(m: &Self::M<T>, f: impl Fn(&T) -> Self::M<U> + Send + Sync + 'static) -> Self::M<U>;

    fn map<T: Elem, U: Elem>(m: &Self::M<T>, f: impl Fn(&T) -> U + Send + Sync + 'static) -> Self::M<U> {
        Self::bind(m, move |x| Self::unit(f(x)))
    }

    /// `f*`, the Kleisli extension.
    fn kleisli<T: Elem, U: Elem>(
        f: impl Fn(&T) -> Self::M<U> + Send + Sync + Clone + 'static,
    ) -> impl Fn(&Self::M<T>) -> Self::M<U> {
        move |m| Self::bind(m, f.clone())
    }

    /// Observe at most `bound` list elements; other monads ignore `bound`.
    fn shape<T: Elem>(m: &Self::M<T>, bound: usize) -> Shape<T>;

    /// Build a value from a complete observation, or `None` if the shape
    /// does not belong to this monad.
    fn from_shape<T: Elem>(s: Shape<T>) -> Option<Self::M<T>>;
}

/// Monads with a least element, used by the infinitary semantics.
pub trait Ordered: Monad {
    fn bottom<T: Elem>() -> Self::M<T>;
}

/// Identity monad: no effects at all.
pub struct Id;

impl Monad for Id {
    const NAME: &'static str = "id";
    type M<T: Elem> = T;

    fn unit<T: Elem>(x: T) -> T {
        x
    }

    fn bind<T: Elem, U: Elem>(m: &T, f: impl Fn(&T) -> U + Send + Sync + 'static) -> U {
        f(m)
    }

    fn shape<T: Elem>(m: &T, _bound: usize) -> Shape<T> {
        Shape::Value(m.clone())
    }

    fn from_shape<T: Elem>(s: Shape<T>) -> Option<T> {
        match s {
            Shape::Value(x) => Some(x),
            _ => None,
        }
    }
}

fn same_elems<T: Elem>(a: &[&T], b: &[&T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.key() == y.key())
}

/// Weight of `x` in a distribution observation, merging equal keys.
fn weight_of<T: Elem>(ws: &[(T, BigRational)], x: &T) -> BigRational {
    let k = x.key();
    ws.iter().filter(|(y, _)| y.key() == k).fold(BigRational::zero(), |acc, (_, w)| acc + w)
}

/// Observational equality. Distributions compare as weight functions.
pub fn shape_eq<T: Elem>(a: &Shape<T>, b: &Shape<T>) -> bool {
    match (a, b) {
        (Shape::Value(x), Shape::Value(y)) => x.key() == y.key(),
        (Shape::Raised(e), Shape::Raised(f)) => e == f,
        (Shape::Bottom, Shape::Bottom) => true,
        (Shape::List { items: x, exhausted: ex }, Shape::List { items: y, exhausted: ey }) => {
            ex == ey && same_elems(&x.iter().collect::<Vec<_>>(), &y.iter().collect::<Vec<_>>())
        }
        (Shape::Dist(x), Shape::Dist(y)) => {
            x.iter().all(|(e, _)| weight_of(x, e) == weight_of(y, e))
                && y.iter().all(|(e, _)| weight_of(x, e) == weight_of(y, e))
        }
        _ => false,
    }
}

/// The approximation order: flat for exceptions, prefix for lists,
/// pointwise for distributions. The empty list is the least list, so an
/// exhausted list still approximates its extensions.
pub fn shape_leq<T: Elem>(a: &Shape<T>, b: &Shape<T>) -> bool {
    match (a, b) {
        (Shape::Bottom, _) => true,
        (Shape::List { items: x, .. }, Shape::List { items: y, .. }) => {
            x.len() <= y.len() && x.iter().zip(y).all(|(p, q)| p.key() == q.key())
        }
        (Shape::Dist(x), Shape::Dist(y)) => x.iter().all(|(e, _)| weight_of(x, e) <= weight_of(y, e)),
        _ => shape_eq(a, b),
    }
}

/// Least upper bound of a finite ascending chain, which is its last
/// element. The empty chain has no bound in general, so it is rejected.
pub fn sup_chain<T: Elem>(chain: &[Shape<T>]) -> Result<Shape<T>, NotAChain> {
    for (i, w) in chain.windows(2).enumerate() {
        if !shape_leq(&w[0], &w[1]) {
            return Err(NotAChain(i + 1));
        }
    }
    chain.last().cloned().ok_or(NotAChain(0))
}

pub fn total_weight(ws: &[(impl Sized, BigRational)]) -> BigRational {
    ws.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w)
}

impl<T> Shape<T> {
    /// Human-readable form: `One`, `raised E`, `[One, Zero]`, `{One: 1/2}`.
    pub fn display(&self, show: impl Fn(&T) -> String) -> String {
        match self {
            Shape::Value(x) => show(x),
            Shape::Raised(e) => format!("raised {e}"),
            Shape::Bottom => "bottom".into(),
            Shape::List { items, exhausted } => {
                let mut parts: Vec<String> = items.iter().map(&show).collect();
                if !exhausted {
                    parts.push("...".into());
                }
                format!("[{}]", parts.join(", "))
            }
            Shape::Dist(ws) => {
                let parts: Vec<String> = ws.iter().map(|(x, w)| format!("{}: {w}", show(x))).collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }

    pub fn to_json(&self, monad: &str, show: impl Fn(&T) -> String) -> serde_json::Value {
        match self {
            Shape::Value(x) => json!({"monad": monad, "value": show(x)}),
            Shape::Raised(e) => json!({"monad": monad, "raised": e.as_ref()}),
            Shape::Bottom => json!({"monad": monad, "bottom": true}),
            Shape::List { items, exhausted } => {
                json!({"monad": monad, "prefix": items.iter().map(&show).collect::<Vec<_>>(), "exhausted": exhausted})
            }
            Shape::Dist(ws) => {
                let weights: serde_json::Map<String, serde_json::Value> =
                    ws.iter().map(|(x, w)| (show(x), json!(w.to_string()))).collect();
                json!({"monad": monad, "weights": weights})
            }
        }
    }
}

impl<T: fmt::Display> fmt::Display for Shape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(|x| x.to_string()))
    }
}
