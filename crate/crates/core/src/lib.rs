//! Monadic Featherweight Java: a small object calculus with algebraic
//! effects, effect handlers and generic methods, together with a type and
//! effect system, a small-step reducer and monadic evaluators.

pub mod ast;
pub mod effects;
pub mod evaluator;
pub mod monads;
pub mod mutation;
pub mod reducer;
pub mod signatures;
pub mod soundness;
pub mod subst;
pub mod syntax;
pub mod typer;

pub use ast::*;
pub use signatures::{CheckError, Checker};
pub use syntax::{parse_source, parse_source_with, ParseError, Printer, Source};
pub use typer::{Diagnostic, Typed};

/// The standard declarations.
pub const PRELUDE: &str = include_str!("../prelude/prelude.mfj");

pub fn prelude() -> Source {
    parse_source(PRELUDE).expect("the prelude parses")
}
