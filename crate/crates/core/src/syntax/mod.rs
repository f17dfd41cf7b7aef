//! Concrete syntax: `.mfj` source files.
//!
//! A file holds nominal declarations, value aliases (`One = 1`), type
//! aliases (`type T = ...`) and an optional `main = expr`. Aliases are
//! expanded while parsing. Numerals, string literals and `fn` lambdas are
//! sugar for ordinary objects.

pub mod lexer;
pub mod parser;
pub mod pretty;

use std::collections::BTreeMap;

pub use lexer::ParseError;
pub use pretty::Printer;

use crate::ast::*;

#[derive(Clone, Debug, Default)]
pub struct Aliases {
    pub values: Vec<(Name, Value)>,
    pub types: Vec<(Name, Type)>,
}

impl Aliases {
    pub fn value(&self, n: &str) -> Option<&Value> {
        self.values.iter().find(|(m, _)| m.as_ref() == n).map(|(_, v)| v)
    }

    pub fn ty(&self, n: &str) -> Option<&Type> {
        self.types.iter().find(|(m, _)| m.as_ref() == n).map(|(_, t)| t)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Source {
    pub program: Program,
    pub main: Option<Expr>,
    /// Every alias in scope, including those inherited from a base source.
    pub aliases: Aliases,
    /// Line and column of each declaration (`N`) and method (`N.m`).
    pub locations: BTreeMap<String, (usize, usize)>,
}

pub fn parse_source(src: &str) -> Result<Source, ParseError> {
    parser::Parser::new(src, Aliases::default())?.source()
}

/// Parse `src` with the aliases and declarations of `base` in scope and
/// return the union of both.
pub fn parse_source_with(base: &Source, src: &str) -> Result<Source, ParseError> {
    let user = parser::Parser::new(src, base.aliases.clone())?.source()?;
    let mut out = base.clone();
    for (n, d) in user.program.decls {
        if out.program.decls.contains_key(&n) {
            let (line, col) = user.locations.get(n.as_ref()).copied().unwrap_or((0, 0));
            return Err(ParseError { line, col, msg: format!("declaration {n} clashes with the prelude") });
        }
        out.program.decls.insert(n, d);
    }
    out.locations.extend(user.locations);
    out.aliases = user.aliases;
    out.main = user.main;
    Ok(out)
}

fn with_parser<T>(
    src: &str,
    aliases: &Aliases,
    f: impl FnOnce(&mut parser::Parser) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    let mut p = parser::Parser::new(src, aliases.clone())?;
    let out = f(&mut p)?;
    p.finish()?;
    Ok(out)
}

pub fn parse_expr(src: &str, aliases: &Aliases) -> Result<Expr, ParseError> {
    with_parser(src, aliases, |p| p.expr())
}

pub fn parse_value(src: &str, aliases: &Aliases) -> Result<Value, ParseError> {
    with_parser(src, aliases, |p| p.value())
}

pub fn parse_type(src: &str, aliases: &Aliases) -> Result<Type, ParseError> {
    with_parser(src, aliases, |p| p.ty())
}

pub fn parse_effect(src: &str, aliases: &Aliases) -> Result<Effect, ParseError> {
    with_parser(src, aliases, |p| p.effect())
}
