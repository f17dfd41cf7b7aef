//! Monad laws, functoriality, weight conservation and chain suprema for the
//! three monads, on generated small values.

use mfj_core::monads::{shape_eq, sup_chain, total_weight, Dist, Exc, LazyList, List, Monad, Ordered, Shape};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

const BOUND: usize = 64;

fn exc_shape() -> impl Strategy<Value = Shape<u32>> {
    prop_oneof![
        (0u32..4).prop_map(Shape::Value),
        prop::sample::select(vec!["E", "F"]).prop_map(|e| Shape::Raised(mfj_core::name(e))),
        Just(Shape::Bottom),
    ]
}

fn list_shape() -> impl Strategy<Value = Shape<u32>> {
    prop::collection::vec(0u32..4, 0..5).prop_map(|items| Shape::List { items, exhausted: true })
}

/// Sub-distributions with weights in eighths.
fn dist_shape() -> impl Strategy<Value = Shape<u32>> {
    prop::collection::vec((0u32..4, 1i64..=3), 0..3).prop_map(|ws| {
        Shape::Dist(ws.into_iter().map(|(x, w)| (x, BigRational::new(w.into(), 8.into()))).collect())
    })
}

/// A Kleisli arrow given by a table of results for 0..4.
fn table<M: Monad>(shapes: Vec<Shape<u32>>) -> impl Fn(&u32) -> M::M<u32> + Clone + Send + Sync + 'static {
    let ms: Vec<M::M<u32>> = shapes.into_iter().map(|s| M::from_shape(s).expect("sample fits the monad")).collect();
    move |x: &u32| ms[*x as usize % ms.len()].clone()
}

fn same<M: Monad>(a: &M::M<u32>, b: &M::M<u32>) -> bool {
    shape_eq(&M::shape(a, BOUND), &M::shape(b, BOUND))
}

fn laws<M: Monad>(m: Shape<u32>, f: Vec<Shape<u32>>, g: Vec<Shape<u32>>, x: u32) -> Result<(), TestCaseError> {
    let m = M::from_shape(m).expect("sample fits the monad");
    let f = table::<M>(f);
    let g = table::<M>(g);
    prop_assert!(same::<M>(&M::bind(&M::unit(x), f.clone()), &f(&x)), "left unit");
    prop_assert!(same::<M>(&M::bind(&m, |y| M::unit(*y)), &m), "right unit");
    let g2 = g.clone();
    let lhs = M::bind(&M::bind(&m, f.clone()), g.clone());
    let rhs = M::bind(&m, move |y| M::bind(&f(y), g2.clone()));
    prop_assert!(same::<M>(&lhs, &rhs), "associativity");
    Ok(())
}

fn functor<M: Monad>(m: Shape<u32>) -> Result<(), TestCaseError> {
    let m = M::from_shape(m).expect("sample fits the monad");
    let f = |x: &u32| x + 1;
    let g = |x: &u32| x * 3;
    let composed = M::map(&m, move |x| g(&f(x)));
    let stepwise = M::map(&M::map(&m, f), g);
    prop_assert!(same::<M>(&composed, &stepwise));
    prop_assert!(same::<M>(&M::map(&m, |x| *x), &m));
    Ok(())
}

proptest! {
    #[test]
    fn exc_laws(m in exc_shape(), f in prop::collection::vec(exc_shape(), 4), g in prop::collection::vec(exc_shape(), 4), x in 0u32..4) {
        laws::<Exc>(m, f, g, x)?;
    }

    #[test]
    fn list_laws(m in list_shape(), f in prop::collection::vec(list_shape(), 4), g in prop::collection::vec(list_shape(), 4), x in 0u32..4) {
        laws::<List>(m, f, g, x)?;
    }

    #[test]
    fn dist_laws(m in dist_shape(), f in prop::collection::vec(dist_shape(), 4), g in prop::collection::vec(dist_shape(), 4), x in 0u32..4) {
        laws::<Dist>(m, f, g, x)?;
    }

    #[test]
    fn maps_compose(e in exc_shape(), l in list_shape(), d in dist_shape()) {
        functor::<Exc>(e)?;
        functor::<List>(l)?;
        functor::<Dist>(d)?;
    }

    #[test]
    fn dist_bind_never_gains_weight(m in dist_shape(), f in prop::collection::vec(dist_shape(), 4)) {
        let before = match &m { Shape::Dist(ws) => total_weight(ws), _ => unreachable!() };
        let dm = Dist::from_shape(m).unwrap();
        let out = Dist::shape(&Dist::bind(&dm, table::<Dist>(f)), BOUND);
        match out {
            Shape::Dist(ws) => prop_assert!(total_weight(&ws) <= before),
            _ => prop_assert!(false, "dist bind left the monad"),
        }
    }

    #[test]
    fn constant_chains_have_their_element_as_supremum(s in list_shape(), n in 1usize..5) {
        let chain = vec![s.clone(); n];
        prop_assert!(shape_eq(&sup_chain(&chain).unwrap(), &s));
    }

    /// Observing a longer prefix extends a shorter one.
    #[test]
    fn list_prefixes_are_stable(k in 0usize..40, extra in 0usize..40) {
        let l = LazyList::from_fn(|i| (i * i) as u32);
        let (short, _) = l.prefix(k);
        let (long, _) = l.prefix(k + extra);
        prop_assert_eq!(&long[..k], &short[..]);
    }
}

#[test]
fn dist_unit_has_weight_one() {
    match Dist::shape(&Dist::unit(7u32), BOUND) {
        Shape::Dist(ws) => assert!(total_weight(&ws).is_one()),
        _ => panic!("dist unit left the monad"),
    }
}

#[test]
fn bottoms_are_least() {
    assert!(matches!(Exc::shape(&Exc::bottom::<u32>(), BOUND), Shape::Bottom));
    assert!(matches!(List::shape(&List::bottom::<u32>(), BOUND), Shape::List { ref items, .. } if items.is_empty()));
    match Dist::shape(&Dist::bottom::<u32>(), BOUND) {
        Shape::Dist(ws) => assert!(total_weight(&ws).is_zero()),
        _ => panic!("dist bottom left the monad"),
    }
}

/// Bind over an infinite list stays lazy: a prefix is observable.
#[test]
fn list_bind_is_lazy_on_infinite_lists() {
    let nats = LazyList::from_fn(|i| i as u32);
    let doubled = List::bind(&nats, |x| List::from_shape(Shape::List { items: vec![*x, *x], exhausted: true }).unwrap());
    match List::shape(&doubled, 6) {
        Shape::List { items, exhausted } => {
            assert_eq!(items, vec![0, 0, 1, 1, 2, 2]);
            assert!(!exhausted);
        }
        _ => panic!("list bind left the monad"),
    }
}
