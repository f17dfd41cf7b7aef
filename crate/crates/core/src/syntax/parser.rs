use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, ParseError, Tok, Token};
use super::{Aliases, Source};
use crate::ast::*;

const KEYWORDS: &[&str] = &[
    "return", "do", "try", "with", "final", "continue", "stop", "pure", "top", "abs", "def", "mgc", "type", "main",
    "fn",
];

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    aliases: Aliases,
    /// Type variables in scope, innermost last.
    tscope: Vec<Name>,
    wild: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(src: &str, aliases: Aliases) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, aliases, tscope: Vec::new(), wild: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Lower(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn lower(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Lower(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(name(&s))
            }
            _ => self.unexpected(what),
        }
    }

    fn upper(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Upper(s) => {
                self.bump();
                Ok(name(&s))
            }
            _ => self.unexpected(what),
        }
    }

    fn wildcard(&mut self) -> Name {
        let n = name(&format!("_{}", self.wild));
        self.wild += 1;
        n
    }

    /// A term binder: a variable or `_`.
    fn binder(&mut self) -> PResult<Name> {
        if matches!(self.peek(), Tok::Wild) {
            self.bump();
            return Ok(self.wildcard());
        }
        self.lower("a variable or `_`")
    }

    fn is_binder_start(&self) -> bool {
        matches!(self.peek(), Tok::Wild) || matches!(self.peek(), Tok::Lower(s) if !KEYWORDS.contains(&s.as_str()))
    }

    fn in_tscope(&self, n: &str) -> bool {
        self.tscope.iter().any(|x| x.as_ref() == n)
    }

    // -- source files ------------------------------------------------------

    pub fn source(mut self) -> PResult<Source> {
        let mut src = Source { aliases: self.aliases.clone(), ..Source::default() };
        while !matches!(self.peek(), Tok::Eof) {
            let (line, col) = self.here();
            if self.is_kw("type") {
                self.bump();
                let n = self.upper("a type alias name")?;
                self.expect_sym("=")?;
                let t = self.ty()?;
                if self.aliases.ty(&n).is_some() {
                    return Err(ParseError { line, col, msg: format!("duplicate type alias {n}") });
                }
                self.aliases.types.push((n.clone(), t.clone()));
                src.aliases.types.push((n, t));
            } else if self.is_kw("main") {
                self.bump();
                self.expect_sym("=")?;
                if src.main.is_some() {
                    return self.err("duplicate `main`");
                }
                src.main = Some(self.expr()?);
                src.locations.insert("main".into(), (line, col));
            } else if matches!(self.peek(), Tok::Upper(_)) && matches!(self.peek_at(1), Tok::Sym("=")) {
                let n = self.upper("an alias name")?;
                self.bump();
                let v = self.value()?;
                if self.aliases.value(&n).is_some() {
                    return Err(ParseError { line, col, msg: format!("duplicate value alias {n}") });
                }
                self.aliases.values.push((n.clone(), v.clone()));
                src.aliases.values.push((n, v));
            } else {
                let d = self.decl(&mut src.locations)?;
                if src.program.decls.contains_key(&d.name) {
                    return Err(ParseError { line, col, msg: format!("duplicate declaration {}", d.name) });
                }
                src.locations.insert(d.name.to_string(), (line, col));
                src.program.decls.insert(d.name.clone(), d);
            }
        }
        Ok(src)
    }

    fn decl(&mut self, locs: &mut BTreeMap<String, (usize, usize)>) -> PResult<TypeDecl> {
        let n = self.upper("a declaration")?;
        if n.as_ref() == OBJECT {
            return self.err("`Object` cannot be redeclared");
        }
        let mark = self.tscope.len();
        let type_params = if self.is_sym("[") { self.type_params()? } else { Vec::new() };
        let mut parents = BTreeSet::new();
        if self.eat_sym("<|") {
            while !self.is_sym("{") {
                parents.insert(self.ntype()?);
                self.eat_sym(",");
            }
        }
        self.expect_sym("{")?;
        let self_ty = NominalType::new(n.clone(), type_params.iter().map(|(y, _)| Type::Var(y.clone())).collect());
        let mut methods = BTreeMap::new();
        while !self.eat_sym("}") {
            let (line, col) = self.here();
            let (m, d) = self.method_decl(Some(&self_ty), false)?;
            if methods.insert(m.clone(), d).is_some() {
                return Err(ParseError { line, col, msg: format!("duplicate method {m}") });
            }
            locs.insert(format!("{n}.{m}"), (line, col));
            self.eat_sym(",");
            self.eat_sym(";");
        }
        self.tscope.truncate(mark);
        Ok(TypeDecl { name: n, type_params, parents, methods })
    }

    /// `[X <: T, Y]`. Brings the names into scope; the caller truncates.
    fn type_params(&mut self) -> PResult<Vec<(Name, Type)>> {
        self.expect_sym("[")?;
        let mut names = Vec::new();
        let mut bounds = Vec::new();
        while !self.eat_sym("]") {
            let x = self.upper("a type parameter")?;
            self.tscope.push(x.clone());
            names.push(x);
            bounds.push(if self.eat_sym("<:") { Some(self.ty()?) } else { None });
            self.eat_sym(",");
        }
        Ok(names.into_iter().zip(bounds).map(|(x, b)| (x, b.unwrap_or_else(Type::object))).collect())
    }

    /// A method entry. With `owner`, `mgc` methods receive their canonical effect.
    fn method_decl(&mut self, owner: Option<&NominalType>, in_sig: bool) -> PResult<(Name, MethodDecl)> {
        let m = self.lower("a method name")?;
        self.expect_sym(":")?;
        let kind = match self.peek() {
            Tok::Lower(k) if k == "abs" => MethodKind::Abs,
            Tok::Lower(k) if k == "def" => MethodKind::Def,
            Tok::Lower(k) if k == "mgc" => MethodKind::Mgc,
            _ => return self.unexpected("`abs`, `def` or `mgc`"),
        };
        self.bump();
        let mark = self.tscope.len();
        let type_params = if self.is_sym("[") { self.type_params()? } else { Vec::new() };
        let mut param_types = Vec::new();
        while !self.is_sym("->") {
            param_types.push(self.ty()?);
            self.eat_sym(",");
        }
        self.expect_sym("->")?;
        let ret = self.ty()?;
        let effect = if self.eat_sym("!") {
            if kind == MethodKind::Mgc && owner.is_some() {
                return self.err("magic methods carry their canonical effect; drop the annotation");
            }
            self.effect()?
        } else if let (MethodKind::Mgc, Some(n)) = (kind, owner) {
            Effect::atom(
                Type::nominal(n.clone()),
                m.clone(),
                type_params.iter().map(|(x, _)| Type::Var(x.clone())).collect(),
            )
        } else {
            Effect::Empty
        };
        let body = if self.is_sym("<") {
            if kind != MethodKind::Def {
                return self.err(format!("only `def` methods have bodies ({m} is {kind})"));
            }
            Some(self.body()?)
        } else {
            if kind == MethodKind::Def && !in_sig {
                return self.err(format!("`def` method {m} needs a body"));
            }
            None
        };
        self.tscope.truncate(mark);
        Ok((m, MethodDecl { kind, mt: MethodTypeEffect { type_params, param_types, ret, effect }, body }))
    }

    /// `<self params, e>`.
    fn body(&mut self) -> PResult<Body> {
        self.expect_sym("<")?;
        let self_var = self.binder()?;
        let mut params = Vec::new();
        while self.is_binder_start() {
            params.push(self.binder()?);
        }
        self.expect_sym(",")?;
        let expr = self.expr()?;
        self.expect_sym(">")?;
        Ok(Body { self_var, params, expr })
    }

    // -- types ---------------------------------------------------------------

    pub fn ty(&mut self) -> PResult<Type> {
        if self.is_sym("[") {
            self.bump();
            let mut parents = BTreeSet::new();
            while !self.eat_sym("]") {
                parents.insert(self.ntype()?);
                self.eat_sym(",");
            }
            let sig = if self.is_sym("{") { self.obj_sig()? } else { Signature::new() };
            return Ok(Type::Obj(ObjType { parents, sig }));
        }
        let n = self.upper("a type")?;
        if n.as_ref() == OBJECT {
            let sig = if self.is_sym("{") { self.obj_sig()? } else { Signature::new() };
            return Ok(Type::Obj(ObjType { parents: BTreeSet::new(), sig }));
        }
        if self.in_tscope(&n) {
            if self.is_sym("[") || self.is_sym("{") {
                return self.err(format!("type variable {n} takes no arguments or signature"));
            }
            return Ok(Type::Var(n));
        }
        if let Some(t) = self.aliases.ty(&n) {
            return Ok(t.clone());
        }
        let args = if self.is_sym("[") { self.type_args()? } else { Vec::new() };
        let sig = if self.is_sym("{") { self.obj_sig()? } else { Signature::new() };
        Ok(Type::Obj(ObjType { parents: BTreeSet::from([NominalType::new(n, args)]), sig }))
    }

    pub fn ntype(&mut self) -> PResult<NominalType> {
        let n = self.upper("a nominal type")?;
        if self.in_tscope(&n) || n.as_ref() == OBJECT {
            return self.err(format!("{n} is not a declared nominal type"));
        }
        let args = if self.is_sym("[") { self.type_args()? } else { Vec::new() };
        Ok(NominalType::new(n, args))
    }

    fn type_args(&mut self) -> PResult<Vec<Type>> {
        self.expect_sym("[")?;
        let mut out = Vec::new();
        while !self.eat_sym("]") {
            out.push(self.ty()?);
            self.eat_sym(",");
        }
        Ok(out)
    }

    fn obj_sig(&mut self) -> PResult<Signature> {
        self.expect_sym("{")?;
        let mut sig = Signature::new();
        while !self.eat_sym("}") {
            let (m, d) = self.method_decl(None, true)?;
            if d.body.is_some() {
                return self.err("object types carry no method bodies");
            }
            if d.kind == MethodKind::Mgc {
                return self.err("magic methods only appear in declarations");
            }
            sig.insert(m, SigEntry { kind: d.kind, mt: d.mt });
            self.eat_sym(",");
            self.eat_sym(";");
        }
        Ok(sig)
    }

    pub fn effect(&mut self) -> PResult<Effect> {
        let mut parts = vec![self.effect_atom()?];
        while self.eat_sym("\\/") {
            parts.push(self.effect_atom()?);
        }
        Ok(Effect::union_all(parts))
    }

    fn effect_atom(&mut self) -> PResult<Effect> {
        if self.is_kw("pure") {
            self.bump();
            return Ok(Effect::Empty);
        }
        if self.is_kw("top") {
            self.bump();
            return Ok(Effect::Top);
        }
        let recv = self.ty()?;
        self.expect_sym(".")?;
        let m = self.lower("a method name")?;
        let targs = if self.is_sym("[") { self.type_args()? } else { Vec::new() };
        Ok(Effect::atom(recv, m, targs))
    }

    // -- values and expressions ------------------------------------------

    pub fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(self.numeral(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(self.string(&s))
            }
            Tok::Lower(s) if s == "fn" && matches!(self.peek_at(1), Tok::Sym("(")) => self.lambda(),
            Tok::Lower(_) => Ok(Value::Var(self.lower("a value")?)),
            Tok::Sym("[") => {
                self.bump();
                let mut parents = BTreeSet::new();
                while !self.eat_sym("]") {
                    parents.insert(self.ntype()?);
                    self.eat_sym(",");
                }
                let methods = if self.is_sym("{") { self.obj_body()? } else { BTreeMap::new() };
                Ok(Value::obj(parents, methods))
            }
            Tok::Upper(s) => {
                if s == OBJECT {
                    self.bump();
                    let methods = if self.is_sym("{") { self.obj_body()? } else { BTreeMap::new() };
                    return Ok(Value::obj(BTreeSet::new(), methods));
                }
                if let Some(v) = self.aliases.value(&s) {
                    let v = v.clone();
                    self.bump();
                    return Ok(v);
                }
                let n = self.ntype()?;
                let methods = if self.is_sym("{") { self.obj_body()? } else { BTreeMap::new() };
                Ok(Value::obj(BTreeSet::from([n]), methods))
            }
            _ => self.unexpected("a value"),
        }
    }

    fn obj_body(&mut self) -> PResult<BTreeMap<Name, MethodDecl>> {
        self.expect_sym("{")?;
        let mut methods = BTreeMap::new();
        while !self.eat_sym("}") {
            let (m, d) = self.method_decl(None, false)?;
            if methods.insert(m.clone(), d).is_some() {
                return self.err(format!("duplicate method {m}"));
            }
            self.eat_sym(",");
            self.eat_sym(";");
        }
        Ok(methods)
    }

    /// `n̂`: `Zero`, or `Succ` whose `pred` returns the predecessor numeral.
    fn numeral(&mut self, n: u64) -> Value {
        let mut v = Value::plain("Zero");
        for _ in 0..n {
            let w = self.wildcard();
            v = succ_of(v, w);
        }
        v
    }

    /// A `String` whose `toNat` either returns the numeral or fails.
    fn string(&mut self, s: &str) -> Value {
        let w = self.wildcard();
        let fail_eff = Effect::atom(
            Type::nominal(NominalType::new(name("Failure"), vec![Type::plain("Nat")])),
            name("fail"),
            vec![],
        );
        let expr = match s.parse::<u64>() {
            Ok(n) => Expr::Return(self.numeral(n)),
            Err(_) => Expr::Call(Call {
                recv: Value::nominal(NominalType::new(name("Failure"), vec![Type::plain("Nat")])),
                method: name("fail"),
                targs: vec![],
                args: vec![],
            }),
        };
        let decl = MethodDecl {
            kind: MethodKind::Def,
            mt: MethodTypeEffect { type_params: vec![], param_types: vec![], ret: Type::plain("Nat"), effect: fail_eff },
            body: Some(Body { self_var: w, params: vec![], expr }),
        };
        Value::obj(BTreeSet::from([NominalType::plain("String")]), BTreeMap::from([(name("toNat"), decl)]))
    }

    /// `fn (x: T) -> U ! φ => e` is `Object{apply: def T -> U ! φ <_ x, e>}`.
    /// Without `-> U` the result is `Object ! top`.
    fn lambda(&mut self) -> PResult<Value> {
        self.bump();
        self.expect_sym("(")?;
        let x = self.binder()?;
        self.expect_sym(":")?;
        let t = self.ty()?;
        self.expect_sym(")")?;
        let (ret, effect) = if self.eat_sym("->") {
            let r = self.ty()?;
            let e = if self.eat_sym("!") { self.effect()? } else { Effect::Empty };
            (r, e)
        } else {
            (Type::object(), Effect::Top)
        };
        self.expect_sym("=>")?;
        let e = self.expr()?;
        let w = self.wildcard();
        let decl = MethodDecl {
            kind: MethodKind::Def,
            mt: MethodTypeEffect { type_params: vec![], param_types: vec![t], ret, effect },
            body: Some(Body { self_var: w, params: vec![x], expr: e }),
        };
        Ok(Value::obj(BTreeSet::new(), BTreeMap::from([(name("apply"), decl)])))
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        if self.is_kw("return") {
            self.bump();
            return Ok(Expr::Return(self.value()?));
        }
        if self.is_kw("do") {
            self.bump();
            let x = self.binder()?;
            self.expect_sym("=")?;
            let a = self.expr()?;
            self.expect_sym(";")?;
            let b = self.expr()?;
            return Ok(Expr::Do(x, Box::new(a), Box::new(b)));
        }
        if self.is_kw("try") {
            self.bump();
            let body = self.expr()?;
            self.expect_kw("with")?;
            let mut clauses = Vec::new();
            while matches!(self.peek(), Tok::Upper(_)) {
                clauses.push(self.clause()?);
            }
            let handler = if self.is_kw("final") {
                self.bump();
                self.expect_sym("<")?;
                let x = self.binder()?;
                self.expect_sym(",")?;
                let e = self.expr()?;
                self.expect_sym(">")?;
                Handler { clauses, final_var: x, final_expr: Box::new(e) }
            } else {
                if clauses.is_empty() {
                    return self.unexpected("a handler clause or `final`");
                }
                Handler::with_default_final(clauses, name("x"))
            };
            return Ok(Expr::Try(Box::new(body), handler));
        }
        let recv = self.value()?;
        self.expect_sym(".")?;
        let method = self.lower("a method name")?;
        let targs = if self.is_sym("[") { self.type_args()? } else { Vec::new() };
        self.expect_sym("(")?;
        let mut args = Vec::new();
        while !self.eat_sym(")") {
            args.push(self.value()?);
            self.eat_sym(",");
        }
        Ok(Expr::Call(Call { recv, method, targs, args }))
    }

    /// `N[T̄].m: [X̄] <x x̄, e> continue|stop`.
    fn clause(&mut self) -> PResult<Clause> {
        let ntype = self.ntype()?;
        self.expect_sym(".")?;
        let method = self.lower("a magic method name")?;
        self.expect_sym(":")?;
        let mark = self.tscope.len();
        let mut type_params = Vec::new();
        if self.eat_sym("[") {
            while !self.eat_sym("]") {
                let x = self.upper("a type parameter")?;
                self.tscope.push(x.clone());
                type_params.push(x);
                self.eat_sym(",");
            }
        }
        let b = self.body()?;
        self.tscope.truncate(mark);
        let mode = if self.is_kw("continue") {
            Mode::Continue
        } else if self.is_kw("stop") {
            Mode::Stop
        } else {
            return self.unexpected("`continue` or `stop`");
        };
        self.bump();
        Ok(Clause { ntype, method, type_params, self_var: b.self_var, params: b.params, body: b.expr, mode })
    }

    pub fn finish(&self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}

pub(crate) fn succ_of(pred: Value, wild: Name) -> Value {
    let decl = MethodDecl {
        kind: MethodKind::Def,
        mt: MethodTypeEffect { type_params: vec![], param_types: vec![], ret: Type::plain("Nat"), effect: Effect::Empty },
        body: Some(Body { self_var: wild, params: vec![], expr: Expr::Return(pred) }),
    };
    Value::obj(BTreeSet::from([NominalType::plain("Succ")]), BTreeMap::from([(name("pred"), decl)]))
}
