use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Elem, Monad, Ordered, Shape};

/// A finitely supported subdistribution. Equal keys are merged and zero
/// weights dropped, so the support is exactly the listed elements.
#[derive(Clone, Debug)]
pub struct DistM<T>(Vec<(T, BigRational)>);

impl<T: Elem> DistM<T> {
    pub fn new(entries: impl IntoIterator<Item = (T, BigRational)>) -> Self {
        let mut out: Vec<(T, BigRational)> = Vec::new();
        let mut index = std::collections::BTreeMap::new();
        for (x, w) in entries {
            if w.is_zero() {
                continue;
            }
            let k = x.key();
            match index.get(&k) {
                Some(&i) => {
                    let slot: &mut (T, BigRational) = &mut out[i];
                    slot.1 += w;
                }
                None => {
                    index.insert(k, out.len());
                    out.push((x, w));
                }
            }
        }
        DistM(out)
    }

    pub fn entries(&self) -> &[(T, BigRational)] {
        &self.0
    }
}

pub struct Dist;

impl Monad for Dist {
    const NAME: &'static str = "dist";
    type M<T: Elem> = DistM<T>;

    fn unit<T: Elem>(x: T) -> DistM<T> {
        DistM(vec![(x, BigRational::one())])
    }

    fn bind<T: Elem, U: Elem>(m: &DistM<T>, f: impl Fn(&T) -> DistM<U> + Send + Sync + 'static) -> DistM<U> {
        DistM::new(m.0.iter().flat_map(|(x, w)| f(x).0.into_iter().map(move |(y, v)| (y, if v.is_one() { w.clone() } else { w * v }))))
    }

    fn shape<T: Elem>(m: &DistM<T>, _bound: usize) -> Shape<T> {
        Shape::Dist(m.0.clone())
    }

    fn from_shape<T: Elem>(s: Shape<T>) -> Option<DistM<T>> {
        match s {
            Shape::Dist(ws) => Some(DistM::new(ws)),
            _ => None,
        }
    }
}

impl Ordered for Dist {
    fn bottom<T: Elem>() -> DistM<T> {
        DistM(Vec::new())
    }
}
