//! Executable soundness: effect interpretations, monadic typing of
//! results, and monitors that check progress and subject reduction on
//! every step of a run.

pub mod interp;
pub mod laws;

use serde::Serialize;

pub use interp::{holds, Denotation, DenotationError, Denoter, Interp};
pub use laws::{interp_law_suite, Condition, LawReport};

use crate::ast::*;
use crate::evaluator::{Config, Machine, Res, StepRule, DEFAULT_FUEL, DEFAULT_PREFIX};
use crate::reducer::Lookup;
use crate::monads::{Dist, Exc, List, Monad, Ordered, Registry, Shape};
use crate::signatures::Checker;
use crate::syntax::Printer;
use crate::typer::Typed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot check soundness of ill-typed program: {0}")]
    IllTyped(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no main expression")]
    NoMain,
    #[error("unknown monad {0}")]
    UnknownMonad(String),
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub fuel: usize,
    pub prefix: usize,
    /// Length of the approximation chain to check.
    pub approx: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { fuel: DEFAULT_FUEL, prefix: DEFAULT_PREFIX, approx: 64 }
    }
}

/// One property checked over a run.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub theorem: &'static str,
    pub pass: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn new(theorem: &'static str) -> Self {
        Check { theorem, pass: true, checked: 0, witness: None }
    }

    fn record(&mut self, v: Verdict) {
        self.checked += 1;
        if let Verdict::Fail(w) = v {
            if self.pass {
                self.witness = Some(w);
            }
            self.pass = false;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub monad: &'static str,
    pub interp: Interp,
    #[serde(rename = "type")]
    pub ty: String,
    pub effect: String,
    /// `finite` or `diverged`.
    pub outcome: &'static str,
    pub steps: usize,
    pub prefix: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, theorem: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.theorem == theorem)
    }
}

/// Monitors for one program under one monad and interpretation.
pub struct Harness<'a, M: Monad> {
    pub machine: &'a Machine<M>,
    checker: Checker<'a>,
    denoter: Denoter<'a>,
    interp: Interp,
    printer: &'a Printer,
}

fn env() -> (TypeEnv, Env) {
    (TypeEnv::new(), Env::new())
}

impl<'a, M: Monad> Harness<'a, M> {
    pub fn new(machine: &'a Machine<M>, interp: Interp, printer: &'a Printer) -> Self {
        Harness {
            machine,
            checker: Checker::new(&machine.program),
            denoter: Denoter::new(&machine.program, machine.registry.exc.clone()),
            interp,
            printer,
        }
    }

    pub fn type_closed(&self, e: &Expr) -> Result<Typed, String> {
        let (phi, gamma) = env();
        self.checker.type_expr(&phi, &gamma, e).map_err(|err| format!("{} does not typecheck: {err}", self.printer.expr(e)))
    }

    fn value_has_type(&self, v: &Value, t: &Type) -> bool {
        let (phi, gamma) = env();
        self.checker
            .type_value(&phi, &gamma, v)
            .and_then(|tv| self.checker.subtype(&phi, &tv, t))
            .unwrap_or(false)
    }

    fn below(&self, sub: &Typed, sup: &Typed, hat: &Effect) -> Result<(), String> {
        let phi = TypeEnv::new();
        if !self.checker.subtype(&phi, &sub.ty, &sup.ty).unwrap_or(false) {
            return Err(format!("type {} is not below {}", self.printer.ty(&sub.ty), self.printer.ty(&sup.ty)));
        }
        let joined = Effect::union(hat.clone(), sub.effect.clone());
        if !self.checker.subeffect(&phi, &joined, &sup.effect).unwrap_or(false) {
            return Err(format!(
                "effect {} is not below {}",
                self.printer.effect(&joined),
                self.printer.effect(&sup.effect)
            ));
        }
        Ok(())
    }

    /// Monadic progress: a well-typed expression returns or steps.
    pub fn check_progress(&self, e: &Expr) -> Verdict {
        if matches!(e, Expr::Return(_)) || self.machine.mon_step(e).is_some() {
            Verdict::Pass
        } else {
            Verdict::Fail(format!("{} is stuck", self.printer.expr(e)))
        }
    }

    /// `⊢ mres : T ! φ` under the interpretation. `wrong` never is.
    pub fn type_monadic_result(&self, m: &Shape<Res>, t: &Type, e: &Effect) -> bool {
        let Ok(den) = self.denoter.denote(self.interp, e) else { return false };
        holds(self.interp, &den, m, &|r: &Res| match r {
            Res::Value(v) => self.value_has_type(v, t),
            Res::Wrong(_) => false,
        })
    }

    fn innermost_call(e: &Expr) -> Option<&Call> {
        match e {
            Expr::Call(c) => Some(c),
            Expr::Do(_, e1, _) => Self::innermost_call(e1),
            _ => None,
        }
    }

    /// `t-run`: the run function's result is well-typed at the call's
    /// instantiated return type and canonical call effect.
    fn check_run(&self, c: &Call, typed: &Typed) -> Verdict {
        let Ok(Lookup::Magic(n)) = crate::reducer::mbody(&self.machine.program, &c.recv, &c.method) else {
            return Verdict::Fail(format!("{} is not a magic call", c.method));
        };
        let Some(run) = self.machine.registry.get(&n, &c.method) else {
            return Verdict::Fail(format!("no run function for {n}.{}", c.method));
        };
        let Some(m) = run(&self.machine.program, &c.recv, &c.args) else {
            return Verdict::Fail(format!("run function for {n}.{} is undefined here", c.method));
        };
        let shape = M::shape(&m, self.machine.prefix);
        let Ok(den) = self.denoter.denote(self.interp, &typed.effect) else {
            return Verdict::Fail(format!("t-run: no reading for {}", self.printer.effect(&typed.effect)));
        };
        if holds(self.interp, &den, &shape, &|v: &Value| self.value_has_type(v, &typed.ty)) {
            Verdict::Pass
        } else {
            Verdict::Fail(format!(
                "t-run: {n}.{} returned {}, not well-typed at {} ! {}",
                c.method,
                shape.display(|v| self.printer.value(v)),
                self.printer.ty(&typed.ty),
                self.printer.effect(&typed.effect)
            ))
        }
    }

    /// Monadic subject reduction for one step `e → m`, given `e : T ! φ`.
    pub fn check_lifted_step(&self, e: &Expr, typed: &Typed) -> Verdict {
        let Some((rule, m)) = self.machine.mon_step(e) else { return Verdict::Pass };
        match &rule {
            StepRule::Mgc { .. } => {
                let Expr::Call(c) = e else { return Verdict::Fail("magic step on a non-call".into()) };
                if let v @ Verdict::Fail(_) = self.check_run(c, typed) {
                    return v;
                }
            }
            StepRule::Do(_) => {
                let Expr::Do(_, e1, _) = e else { return Verdict::Fail("do step on a non-do".into()) };
                let inner = match self.type_closed(e1) {
                    Ok(t) => t,
                    Err(w) => return Verdict::Fail(w),
                };
                if let Verdict::Fail(w) = self.check_lifted_step(e1, &inner) {
                    return Verdict::Fail(format!("in {}: {w}", self.printer.expr(e1)));
                }
            }
            StepRule::Pure(_) | StepRule::Ret => {}
        }
        let hat = match rule.innermost() {
            StepRule::Mgc { .. } => match Self::innermost_call(e).map(|c| self.type_closed(&Expr::Call(c.clone()))) {
                Some(Ok(t)) => t.effect,
                Some(Err(w)) => return Verdict::Fail(w),
                None => return Verdict::Fail("magic step without a call".into()),
            },
            _ => Effect::Empty,
        };
        for e2 in M::shape(&m, self.machine.prefix).support() {
            let t2 = match self.type_closed(e2) {
                Ok(t) => t,
                Err(w) => return Verdict::Fail(format!("{rule}: {w}")),
            };
            if let Err(w) = self.below(&t2, typed, &hat) {
                return Verdict::Fail(format!(
                    "{rule}: {} steps to {}: {w}",
                    self.printer.expr(e),
                    self.printer.expr(e2)
                ));
            }
        }
        Verdict::Pass
    }
}

impl<M: Ordered> Harness<'_, M> {
    /// Run `main` and check every property along the way.
    pub fn run(&self, main: &Expr, opts: &Options) -> Result<Report, HarnessError> {
        let typed = self.type_closed(main).map_err(HarnessError::IllTyped)?;
        self.denoter.applicable(self.interp, &typed.effect).map_err(HarnessError::NotApplicable)?;
        let mut progress = Check::new("progress");
        let mut preservation = Check::new("preservation");
        let mut lifted = Check::new("subject-reduction");
        let mut no_wrong = Check::new("no-wrong");
        let mut finitary = Check::new("finitary-soundness");
        let mut infinitary = Check::new("infinitary-soundness");

        let mut mc = self.machine.start(main);
        let mut steps = 0;
        let mut finished = false;
        loop {
            let shape = M::shape(&mc, self.machine.prefix);
            for c in shape.support() {
                match c {
                    Config::Exp(e) => match self.type_closed(e) {
                        Ok(t) => {
                            preservation.record(match self.below(&t, &typed, &Effect::Empty) {
                                Ok(()) => Verdict::Pass,
                                Err(w) => Verdict::Fail(format!("step {steps}: {}: {w}", self.printer.expr(e))),
                            });
                            progress.record(self.check_progress(e));
                            lifted.record(match self.check_lifted_step(e, &t) {
                                Verdict::Fail(w) => Verdict::Fail(format!("step {steps}: {w}")),
                                v => v,
                            });
                        }
                        Err(w) => preservation.record(Verdict::Fail(format!("step {steps}: {w}"))),
                    },
                    Config::Res(Res::Wrong(e)) => no_wrong.record(Verdict::Fail(format!(
                        "step {steps}: wrong from {}",
                        e.as_ref().map(|e| self.printer.expr(e)).unwrap_or_default()
                    ))),
                    Config::Res(Res::Value(_)) => {}
                }
            }
            if self.machine.all_results(&mc) {
                finished = true;
                break;
            }
            if steps == opts.fuel {
                break;
            }
            mc = self.machine.big_step(&mc);
            steps += 1;
        }
        no_wrong.checked += 1;

        let mut result = None;
        if finished {
            let res = Machine::<M>::to_results(&mc);
            let shape = M::shape(&res, self.machine.prefix);
            result = Some(shape.display(|r| self.machine.show_res(self.printer, r)));
            finitary.record(if self.type_monadic_result(&shape, &typed.ty, &typed.effect) {
                Verdict::Pass
            } else {
                Verdict::Fail(format!("result {} is not well-typed", result.as_deref().unwrap_or_default()))
            });
        }
        for (i, approx) in self.machine.approx_chain(main, opts.approx).iter().enumerate() {
            let shape = M::shape(approx, self.machine.prefix);
            infinitary.record(if self.type_monadic_result(&shape, &typed.ty, &typed.effect) {
                Verdict::Pass
            } else {
                Verdict::Fail(format!(
                    "approximation {i}: {} is not well-typed",
                    shape.display(|r| self.machine.show_res(self.printer, r))
                ))
            });
        }

        Ok(Report {
            monad: M::NAME,
            interp: self.interp,
            ty: self.printer.ty(&typed.ty),
            effect: self.printer.effect(&typed.effect),
            outcome: if finished { "finite" } else { "diverged" },
            steps,
            prefix: self.machine.prefix,
            result,
            checks: vec![progress, preservation, lifted, no_wrong, finitary, infinitary],
        })
    }
}

fn run_with<M: Ordered>(
    program: &Program,
    main: &Expr,
    interp: Interp,
    registry: Registry<M>,
    opts: &Options,
    printer: &Printer,
) -> Result<Report, HarnessError> {
    let machine = Machine::new(program.clone(), registry).with_prefix(opts.prefix);
    Harness::new(&machine, interp, printer).run(main, opts)
}

/// Check soundness of a program under one interpretation, with the
/// standard run functions of its monad.
pub fn check_program(
    program: &Program,
    main: &Expr,
    interp: Interp,
    opts: &Options,
    printer: &Printer,
) -> Result<Report, HarnessError> {
    let diags = Checker::new(program).check_program(Some(main));
    if let Some(d) = diags.first() {
        return Err(HarnessError::IllTyped(format!("{}: {}", d.loc, d.msg)));
    }
    match interp.monad() {
        "exc" => run_with::<Exc>(program, main, interp, Registry::standard(), opts, printer),
        "list" => run_with::<List>(program, main, interp, Registry::standard(), opts, printer),
        "dist" => run_with::<Dist>(program, main, interp, Registry::standard(), opts, printer),
        m => Err(HarnessError::UnknownMonad(m.to_string())),
    }
}

/// As [`check_program`], with the run functions of
/// [`Registry::corrupted`].
pub fn check_program_corrupted(
    program: &Program,
    main: &Expr,
    interp: Interp,
    opts: &Options,
    printer: &Printer,
) -> Result<Report, HarnessError> {
    match interp.monad() {
        "exc" => run_with::<Exc>(program, main, interp, Registry::corrupted(), opts, printer),
        "list" => run_with::<List>(program, main, interp, Registry::corrupted(), opts, printer),
        "dist" => run_with::<Dist>(program, main, interp, Registry::corrupted(), opts, printer),
        m => Err(HarnessError::UnknownMonad(m.to_string())),
    }
}
