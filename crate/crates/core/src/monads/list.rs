use std::sync::{Arc, Mutex, OnceLock};

use super::{Elem, Monad, Shape};
use crate::mutation::{self, Mutation};

/// Upper bound on silent steps during one observation. Bind over an
/// unbounded list whose elements map to empty lists never produces a cell;
/// observations give up instead of hanging.
const SKIP_FUEL: usize = 1 << 16;

type Thunk<T> = Box<dyn FnOnce() -> Cell<T> + Send>;
type Kleisli<T, U> = Arc<dyn Fn(&T) -> LazyList<U> + Send + Sync>;

enum Cell<T> {
    Nil,
    Cons(T, LazyList<T>),
    /// A step that produced no element yet.
    Skip(LazyList<T>),
}

struct Node<T> {
    cell: OnceLock<Cell<T>>,
    thunk: Mutex<Option<Thunk<T>>>,
}

/// A possibly infinite list, computed on demand and memoized.
pub struct LazyList<T>(Arc<Node<T>>);

impl<T> Clone for LazyList<T> {
    fn clone(&self) -> Self {
        LazyList(self.0.clone())
    }
}

impl<T> std::fmt::Debug for LazyList<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LazyList(..)")
    }
}

impl<T: Elem> LazyList<T> {
    fn ready(c: Cell<T>) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(c);
        LazyList(Arc::new(Node { cell, thunk: Mutex::new(None) }))
    }

    fn lazy(f: impl FnOnce() -> Cell<T> + Send + 'static) -> Self {
        LazyList(Arc::new(Node { cell: OnceLock::new(), thunk: Mutex::new(Some(Box::new(f))) }))
    }

    fn force(&self) -> &Cell<T> {
        self.0.cell.get_or_init(|| {
            let thunk = self.0.thunk.lock().expect("list thunk lock").take();
            thunk.expect("a list cell is forced once")()
        })
    }

    pub fn nil() -> Self {
        Self::ready(Cell::Nil)
    }

    pub fn from_vec(items: Vec<T>) -> Self {
        items.into_iter().rev().fold(Self::nil(), |tail, x| Self::ready(Cell::Cons(x, tail)))
    }

    /// `[f(0), f(1), ...]`, without end.
    pub fn from_fn(f: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        fn go<T: Elem>(i: usize, f: Arc<dyn Fn(usize) -> T + Send + Sync>) -> LazyList<T> {
            LazyList::lazy(move || Cell::Cons(f(i), go(i + 1, f)))
        }
        go(0, Arc::new(f))
    }

    pub fn append(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::lazy(move || match a.force() {
            Cell::Nil => Cell::Skip(b),
            Cell::Cons(x, r) => Cell::Cons(x.clone(), r.append(&b)),
            Cell::Skip(r) => Cell::Skip(r.append(&b)),
        })
    }

    fn bind_with<U: Elem>(&self, f: Kleisli<T, U>) -> LazyList<U> {
        let l = self.clone();
        LazyList::lazy(move || match l.force() {
            Cell::Nil => Cell::Nil,
            Cell::Cons(x, r) => Cell::Skip(f(x).append(&r.bind_with(f.clone()))),
            Cell::Skip(r) => Cell::Skip(r.bind_with(f.clone())),
        })
    }

    /// All elements, provided every cell is already computed.
    fn ready_items(&self) -> Option<Vec<T>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur.0.cell.get()? {
                Cell::Nil => return Some(out),
                Cell::Cons(x, r) => {
                    out.push(x.clone());
                    cur = r;
                }
                Cell::Skip(r) => cur = r,
            }
        }
    }

    /// At most `bound` elements, and whether the list ends right after them.
    pub fn prefix(&self, bound: usize) -> (Vec<T>, bool) {
        let mut out = Vec::new();
        let mut cur = self.clone();
        let mut fuel = SKIP_FUEL;
        loop {
            let next = match cur.force() {
                Cell::Nil => return (out, true),
                Cell::Cons(x, r) => {
                    if out.len() == bound {
                        return (out, false);
                    }
                    out.push(x.clone());
                    r.clone()
                }
                Cell::Skip(r) => {
                    if fuel == 0 {
                        return (out, false);
                    }
                    fuel -= 1;
                    r.clone()
                }
            };
            cur = next;
        }
    }
}

pub struct List;

/// Outer lists longer than this are not reordered by the seeded fault.
const REVERSED_BIND_BOUND: usize = 1 << 12;

impl Monad for List {
    const NAME: &'static str = "list";
    const LAZY: bool = true;
    type M<T: Elem> = LazyList<T>;

    fn unit<T: Elem>(x: T) -> LazyList<T> {
        LazyList::from_vec(vec![x])
    }

    fn bind<T: Elem, U: Elem>(m: &LazyList<T>, f: impl Fn(&T) -> LazyList<U> + Send + Sync + 'static) -> LazyList<U> {
        if mutation::active(Mutation::ListBindOrder) {
            let (items, done) = m.prefix(REVERSED_BIND_BOUND);
            if done {
                return items.iter().rev().fold(LazyList::nil(), |acc, x| acc.append(&f(x)));
            }
        }
        // Binding fully computed lists eagerly keeps long runs from
        // building towers of suspended appends.
        if let Some(items) = m.ready_items() {
            let parts: Vec<LazyList<U>> = items.iter().map(&f).collect();
            if let Some(ready) = parts.iter().map(LazyList::ready_items).collect::<Option<Vec<_>>>() {
                return LazyList::from_vec(ready.into_iter().flatten().collect());
            }
            return parts.iter().rev().fold(LazyList::nil(), |acc, p| p.append(&acc));
        }
        m.bind_with(Arc::new(f))
    }

    /// Unaffected by the seeded bind fault, so the fault is not undone by
    /// the maps that wrap every step.
    fn map<T: Elem, U: Elem>(m: &LazyList<T>, f: impl Fn(&T) -> U + Send + Sync + 'static) -> LazyList<U> {
        if let Some(items) = m.ready_items() {
            return LazyList::from_vec(items.iter().map(f).collect());
        }
        m.bind_with(Arc::new(move |x| LazyList::from_vec(vec![f(x)])))
    }

    fn shape<T: Elem>(m: &LazyList<T>, bound: usize) -> Shape<T> {
        let (items, exhausted) = m.prefix(bound);
        Shape::List { items, exhausted }
    }

    fn from_shape<T: Elem>(s: Shape<T>) -> Option<LazyList<T>> {
        match s {
            Shape::List { items, exhausted: true } => Some(LazyList::from_vec(items)),
            _ => None,
        }
    }
}

impl super::Ordered for List {
    fn bottom<T: Elem>() -> LazyList<T> {
        LazyList::nil()
    }
}
