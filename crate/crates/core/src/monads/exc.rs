use super::{Elem, Monad, Ordered, Shape};
use crate::ast::Name;

/// `X + Exc`, with a least element added for approximations.
#[derive(Clone, Debug)]
pub enum ExcM<T> {
    Value(T),
    Raised(Name),
    Bottom,
}

pub struct Exc;

impl Monad for Exc {
    const NAME: &'static str = "exc";
    type M<T: Elem> = ExcM<T>;

    fn unit<T: Elem>(x: T) -> ExcM<T> {
        ExcM::Value(x)
    }

    fn bind<T: Elem, U: Elem>(m: &ExcM<T>, f: impl Fn(&T) -> ExcM<U> + Send + Sync + 'static) -> ExcM<U> {
        match m {
            ExcM::Value(x) => f(x),
            ExcM::Raised(e) => ExcM::Raised(e.clone()),
            ExcM::Bottom => ExcM::Bottom,
        }
    }

    fn shape<T: Elem>(m: &ExcM<T>, _bound: usize) -> Shape<T> {
        match m {
            ExcM::Value(x) => Shape::Value(x.clone()),
            ExcM::Raised(e) => Shape::Raised(e.clone()),
            ExcM::Bottom => Shape::Bottom,
        }
    }

    fn from_shape<T: Elem>(s: Shape<T>) -> Option<ExcM<T>> {
        match s {
            Shape::Value(x) => Some(ExcM::Value(x)),
            Shape::Raised(e) => Some(ExcM::Raised(e)),
            Shape::Bottom => Some(ExcM::Bottom),
            _ => None,
        }
    }
}

impl Ordered for Exc {
    fn bottom<T: Elem>() -> ExcM<T> {
        ExcM::Bottom
    }
}
