//! Monadic reduction, stepping of monadic configurations, and the
//! finitary and infinitary semantics.

use std::sync::Arc;

use crate::ast::*;
use crate::monads::{Elem, Monad, Ordered, Registry, Shape};
use crate::reducer::{mbody, pure_step, stuck_reason, Lookup, PureRule};
use crate::subst::{AlphaKey, Subst};
use crate::syntax::Printer;

pub const DEFAULT_FUEL: usize = 10_000;
pub const DEFAULT_PREFIX: usize = 256;

/// Finite configurations up to this size are rebuilt eagerly after a step.
const MATERIALIZE_BOUND: usize = 1 << 20;

#[derive(Clone, Debug)]
pub enum Res {
    Value(Value),
    /// A stuck expression; the attached term only serves diagnostics.
    Wrong(Option<Expr>),
}

impl PartialEq for Res {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

#[derive(Clone, Debug)]
pub enum Config {
    Exp(Expr),
    Res(Res),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConfigKey {
    Exp(AlphaKey<Expr>),
    Value(AlphaKey<Value>),
    Wrong,
}

impl Elem for Res {
    type Key = ConfigKey;
    fn key(&self) -> ConfigKey {
        match self {
            Res::Value(v) => ConfigKey::Value(v.key()),
            Res::Wrong(_) => ConfigKey::Wrong,
        }
    }
}

impl Elem for Config {
    type Key = ConfigKey;
    fn key(&self) -> ConfigKey {
        match self {
            Config::Exp(e) => ConfigKey::Exp(e.key()),
            Config::Res(r) => r.key(),
        }
    }
}

/// Which monadic rule produced a step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepRule {
    Pure(PureRule),
    Mgc { ntype: Name, method: Name },
    Ret,
    Do(Box<StepRule>),
}

impl StepRule {
    /// The rule that fired innermost, skipping `do` contexts.
    pub fn innermost(&self) -> &StepRule {
        match self {
            StepRule::Do(r) => r.innermost(),
            r => r,
        }
    }
}

impl std::fmt::Display for StepRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepRule::Pure(r) => write!(f, "{}", r.name()),
            StepRule::Mgc { ntype, method } => write!(f, "mgc({ntype}.{method})"),
            StepRule::Ret => write!(f, "ret"),
            StepRule::Do(r) => write!(f, "do({r})"),
        }
    }
}

/// Everything needed to run programs in monad `M`.
pub struct Machine<M: Monad> {
    pub program: Arc<Program>,
    pub registry: Arc<Registry<M>>,
    /// Observation bound for possibly infinite lists.
    pub prefix: usize,
}

impl<M: Monad> Clone for Machine<M> {
    fn clone(&self) -> Self {
        Machine { program: self.program.clone(), registry: self.registry.clone(), prefix: self.prefix }
    }
}

#[derive(Clone, Debug)]
pub enum Finitary<T> {
    Finite { result: T, steps: usize },
    Diverged { fuel: usize },
}

impl<M: Monad> Machine<M> {
    pub fn new(program: Program, registry: Registry<M>) -> Self {
        Machine { program: Arc::new(program), registry: Arc::new(registry), prefix: DEFAULT_PREFIX }
    }

    pub fn with_prefix(mut self, prefix: usize) -> Self {
        self.prefix = prefix;
        self
    }

    /// One monadic step `e → m`, or `None` for returns and stuck terms.
    pub fn mon_step(&self, e: &Expr) -> Option<(StepRule, M::M<Expr>)> {
        if let Some((r, e2)) = pure_step(&self.program, e) {
            return Some((StepRule::Pure(r), M::unit(e2)));
        }
        match e {
            Expr::Call(c) => {
                let Ok(Lookup::Magic(n)) = mbody(&self.program, &c.recv, &c.method) else { return None };
                let run = self.registry.get(&n, &c.method)?;
                let m = run(&self.program, &c.recv, &c.args)?;
                Some((StepRule::Mgc { ntype: n, method: c.method.clone() }, M::map(&m, |v| Expr::Return(v.clone()))))
            }
            Expr::Do(x, e1, e2) => {
                if let Expr::Return(v) = e1.as_ref() {
                    let mut s = Subst::new();
                    s.add_value(x.clone(), v.clone());
                    return Some((StepRule::Ret, M::unit(s.expr(e2))));
                }
                let (r, m) = self.mon_step(e1)?;
                let (x, e2) = (x.clone(), e2.clone());
                Some((StepRule::Do(Box::new(r)), M::map(&m, move |e1| Expr::Do(x.clone(), Box::new(e1.clone()), e2.clone()))))
            }
            _ => None,
        }
    }

    pub fn step_config(&self, c: &Config) -> M::M<Config> {
        match c {
            Config::Res(r) => M::unit(Config::Res(r.clone())),
            Config::Exp(Expr::Return(v)) => M::unit(Config::Res(Res::Value(v.clone()))),
            Config::Exp(e) => match self.mon_step(e) {
                Some((_, m)) => M::map(&m, |e| Config::Exp(e.clone())),
                None => M::unit(Config::Res(Res::Wrong(Some(e.clone())))),
            },
        }
    }

    /// The rule each expression configuration in `mc` steps by.
    pub fn rules(&self, mc: &M::M<Config>) -> Vec<String> {
        M::shape(mc, self.prefix)
            .support()
            .into_iter()
            .map(|c| match c {
                Config::Exp(Expr::Return(_)) => "ret".to_string(),
                Config::Exp(e) => match self.mon_step(e) {
                    Some((r, _)) => r.to_string(),
                    None => "wrong".to_string(),
                },
                Config::Res(_) => "res".to_string(),
            })
            .collect()
    }

    /// `mconf ⇒ mconf'`. Finite observations are rebuilt eagerly so that
    /// long runs do not pile up suspended computations.
    pub fn big_step(&self, mc: &M::M<Config>) -> M::M<Config> {
        let me = self.clone();
        let next = M::bind(mc, move |c| me.step_config(c));
        if !M::LAZY {
            return next;
        }
        let shape = M::shape(&next, MATERIALIZE_BOUND);
        if shape.is_complete() {
            if let Some(m) = M::from_shape(shape) {
                return m;
            }
        }
        next
    }

    pub fn start(&self, e: &Expr) -> M::M<Config> {
        M::unit(Config::Exp(e.clone()))
    }

    /// Every observed element is a result, and the observation is complete.
    pub fn all_results(&self, mc: &M::M<Config>) -> bool {
        let s = M::shape(mc, self.prefix);
        s.is_complete() && s.support().iter().all(|c| matches!(c, Config::Res(_)))
    }

    pub fn to_results(mc: &M::M<Config>) -> M::M<Res> {
        M::map(mc, |c| match c {
            Config::Res(r) => r.clone(),
            Config::Exp(e) => Res::Wrong(Some(e.clone())),
        })
    }

    pub fn finitary(&self, e: &Expr, fuel: usize) -> Finitary<M::M<Res>> {
        let mut mc = self.start(e);
        for steps in 0..=fuel {
            if self.all_results(&mc) {
                return Finitary::Finite { result: Self::to_results(&mc), steps };
            }
            if steps < fuel {
                mc = self.big_step(&mc);
            }
        }
        Finitary::Diverged { fuel }
    }

    /// The configurations reached after 0, 1, ... steps, stopping early once
    /// only results remain.
    pub fn run_configs(&self, e: &Expr, fuel: usize) -> Vec<M::M<Config>> {
        let mut out = vec![self.start(e)];
        for _ in 0..fuel {
            let last = out.last().expect("non-empty");
            if self.all_results(last) {
                break;
            }
            let next = self.big_step(last);
            out.push(next);
        }
        out
    }

    pub fn show_config(&self, printer: &Printer, c: &Config) -> String {
        match c {
            Config::Exp(e) => printer.expr(e),
            Config::Res(Res::Value(v)) => printer.value(v),
            Config::Res(Res::Wrong(_)) => "wrong".into(),
        }
    }

    pub fn show_res(&self, printer: &Printer, r: &Res) -> String {
        match r {
            Res::Value(v) => printer.value(v),
            Res::Wrong(_) => "wrong".into(),
        }
    }

    /// The golden trace: `n: <configuration>` per step, starting at 1.
    pub fn trace(&self, printer: &Printer, e: &Expr, fuel: usize) -> Vec<String> {
        self.run_configs(e, fuel)
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, mc)| format!("{i}: {}", M::shape(mc, self.prefix).display(|c| self.show_config(printer, c))))
            .collect()
    }

    /// Stuck sub-terms of `Wrong` results, for diagnostics.
    pub fn wrong_reasons(&self, m: &M::M<Res>) -> Vec<String> {
        M::shape(m, self.prefix)
            .support()
            .into_iter()
            .filter_map(|r| match r {
                Res::Wrong(Some(e)) => Some(stuck_reason(&self.program, e)),
                Res::Wrong(None) => Some("stuck".into()),
                Res::Value(_) => None,
            })
            .collect()
    }
}

impl<M: Ordered> Machine<M> {
    /// `mctr₀*`: expressions become bottom, results stay.
    pub fn approximate(mc: &M::M<Config>) -> M::M<Res> {
        M::bind(mc, |c| match c {
            Config::Exp(_) => M::bottom(),
            Config::Res(r) => M::unit(r.clone()),
        })
    }

    /// `⟦e⟧₀ … ⟦e⟧ₙ`.
    pub fn approx_chain(&self, e: &Expr, n: usize) -> Vec<M::M<Res>> {
        let mut mc = self.start(e);
        let mut out = vec![Self::approximate(&mc)];
        for _ in 0..n {
            mc = self.big_step(&mc);
            out.push(Self::approximate(&mc));
        }
        out
    }

    pub fn infinitary_approx(&self, e: &Expr, n: usize) -> M::M<Res> {
        self.approx_chain(e, n).pop().expect("non-empty chain")
    }
}

pub fn shape_of<M: Monad, T: Elem>(m: &M::M<T>, bound: usize) -> Shape<T> {
    M::shape(m, bound)
}
