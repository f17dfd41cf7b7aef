//! Printing in the concrete syntax accepted by the parser.
//!
//! `print(parse(s))` reparses to an α-equivalent program. With aliases,
//! closed values and object types α-equal to an alias print as its name.

use std::fmt::Write;

use super::{Aliases, Source};
use crate::ast::*;
use crate::effects::EffectNF;
use crate::subst::{canon_type, canon_value};

#[derive(Default)]
pub struct Printer {
    values: Vec<(Name, Value)>,
    types: Vec<(Name, Type)>,
}

fn show_var(x: &Name) -> &str {
    if x.starts_with('_') {
        "_"
    } else {
        x
    }
}

impl Printer {
    pub fn plain() -> Self {
        Printer::default()
    }

    /// A printer that folds values and types back to the given aliases.
    pub fn folding(aliases: &Aliases) -> Self {
        Printer {
            values: aliases.values.iter().map(|(n, v)| (n.clone(), canon_value(v))).collect(),
            types: aliases
                .types
                .iter()
                .filter(|(_, t)| matches!(t, Type::Obj(o) if !o.sig.is_empty()))
                .map(|(n, t)| (n.clone(), canon_type(t)))
                .collect(),
        }
    }

    pub fn ty(&self, t: &Type) -> String {
        let mut s = String::new();
        self.w_type(&mut s, t);
        s
    }

    pub fn effect(&self, e: &Effect) -> String {
        let mut s = String::new();
        self.w_effect(&mut s, e);
        s
    }

    pub fn value(&self, v: &Value) -> String {
        let mut s = String::new();
        self.w_value(&mut s, v);
        s
    }

    pub fn expr(&self, e: &Expr) -> String {
        let mut s = String::new();
        self.w_expr(&mut s, e);
        s
    }

    pub fn mt(&self, mt: &MethodTypeEffect) -> String {
        let mut s = String::new();
        self.w_mt(&mut s, MethodKind::Def, mt, false);
        s
    }

    fn w_nominal(&self, s: &mut String, n: &NominalType) {
        s.push_str(&n.name);
        if !n.args.is_empty() {
            s.push('[');
            for (i, a) in n.args.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                self.w_type(s, a);
            }
            s.push(']');
        }
    }

    fn w_parents(&self, s: &mut String, parents: &std::collections::BTreeSet<NominalType>) {
        match parents.len() {
            0 => s.push_str(OBJECT),
            1 => self.w_nominal(s, parents.iter().next().expect("one parent")),
            _ => {
                s.push('[');
                for (i, p) in parents.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    self.w_nominal(s, p);
                }
                s.push(']');
            }
        }
    }

    fn w_type(&self, s: &mut String, t: &Type) {
        match t {
            Type::Var(x) => s.push_str(x),
            Type::Obj(o) => {
                if !self.types.is_empty() && !o.sig.is_empty() {
                    let c = canon_type(t);
                    if let Some((n, _)) = self.types.iter().find(|(_, a)| *a == c) {
                        s.push_str(n);
                        return;
                    }
                }
                self.w_parents(s, &o.parents);
                if !o.sig.is_empty() {
                    s.push('{');
                    for (i, (m, e)) in o.sig.iter().enumerate() {
                        if i > 0 {
                            s.push_str(", ");
                        }
                        let _ = write!(s, "{m}: ");
                        self.w_mt(s, e.kind, &e.mt, false);
                    }
                    s.push('}');
                }
            }
        }
    }

    /// `kind [X <: B] T̄ -> T ! φ`; `canonical_mgc` drops the effect of
    /// declared magic methods, which the parser regenerates.
    fn w_mt(&self, s: &mut String, kind: MethodKind, mt: &MethodTypeEffect, canonical_mgc: bool) {
        let _ = write!(s, "{kind}");
        if !mt.type_params.is_empty() {
            s.push_str(" [");
            for (i, (x, b)) in mt.type_params.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(x);
                if !b.is_object() {
                    s.push_str(" <: ");
                    self.w_type(s, b);
                }
            }
            s.push(']');
        }
        for p in &mt.param_types {
            s.push(' ');
            self.w_type(s, p);
        }
        s.push_str(" -> ");
        self.w_type(s, &mt.ret);
        let skip = canonical_mgc && kind == MethodKind::Mgc;
        if !skip && mt.effect != Effect::Empty {
            s.push_str(" ! ");
            self.w_effect(s, &mt.effect);
        }
    }

    fn w_effect(&self, s: &mut String, e: &Effect) {
        let nf = EffectNF::of(e);
        if nf.top {
            s.push_str("top");
            return;
        }
        if nf.atoms.is_empty() {
            s.push_str("pure");
            return;
        }
        for (i, a) in nf.atoms.iter().enumerate() {
            if i > 0 {
                s.push_str(" \\/ ");
            }
            self.w_type(s, &a.recv);
            let _ = write!(s, ".{}", a.method);
            self.w_targs(s, &a.targs);
        }
    }

    fn w_targs(&self, s: &mut String, targs: &[Type]) {
        if targs.is_empty() {
            return;
        }
        s.push('[');
        for (i, t) in targs.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            self.w_type(s, t);
        }
        s.push(']');
    }

    fn w_method(&self, s: &mut String, m: &Name, d: &MethodDecl, canonical_mgc: bool) {
        let _ = write!(s, "{m}: ");
        self.w_mt(s, d.kind, &d.mt, canonical_mgc);
        if let Some(b) = &d.body {
            s.push_str(" <");
            s.push_str(show_var(&b.self_var));
            for p in &b.params {
                s.push(' ');
                s.push_str(show_var(p));
            }
            s.push_str(", ");
            self.w_expr(s, &b.expr);
            s.push('>');
        }
    }

    fn w_value(&self, s: &mut String, v: &Value) {
        match v {
            Value::Var(x) => s.push_str(show_var(x)),
            Value::Obj(o) => {
                if !self.values.is_empty() && o.is_closed() && !o.methods.is_empty() {
                    let c = canon_value(v);
                    if let Some((n, _)) = self.values.iter().find(|(_, a)| *a == c) {
                        s.push_str(n);
                        return;
                    }
                }
                self.w_parents(s, &o.parents);
                if !o.methods.is_empty() {
                    s.push('{');
                    for (i, (m, d)) in o.methods.iter().enumerate() {
                        if i > 0 {
                            s.push_str(", ");
                        }
                        self.w_method(s, m, d, false);
                    }
                    s.push('}');
                }
            }
        }
    }

    fn w_expr(&self, s: &mut String, e: &Expr) {
        match e {
            Expr::Call(c) => {
                self.w_value(s, &c.recv);
                let _ = write!(s, ".{}", c.method);
                self.w_targs(s, &c.targs);
                s.push('(');
                for (i, a) in c.args.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    self.w_value(s, a);
                }
                s.push(')');
            }
            Expr::Return(v) => {
                s.push_str("return ");
                self.w_value(s, v);
            }
            Expr::Do(x, a, b) => {
                let _ = write!(s, "do {} = ", show_var(x));
                self.w_expr(s, a);
                s.push_str("; ");
                self.w_expr(s, b);
            }
            Expr::Try(b, h) => {
                s.push_str("try ");
                self.w_expr(s, b);
                s.push_str(" with");
                for c in &h.clauses {
                    s.push(' ');
                    self.w_nominal(s, &c.ntype);
                    let _ = write!(s, ".{}: ", c.method);
                    if !c.type_params.is_empty() {
                        s.push('[');
                        s.push_str(&c.type_params.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
                        s.push_str("] ");
                    }
                    s.push('<');
                    s.push_str(show_var(&c.self_var));
                    for p in &c.params {
                        s.push(' ');
                        s.push_str(show_var(p));
                    }
                    s.push_str(", ");
                    self.w_expr(s, &c.body);
                    let _ = write!(s, "> {}", c.mode);
                }
                if h.clauses.is_empty() || !h.has_default_final() {
                    let _ = write!(s, " final <{}, ", show_var(&h.final_var));
                    self.w_expr(s, &h.final_expr);
                    s.push('>');
                }
            }
        }
    }

    pub fn decl(&self, d: &TypeDecl) -> String {
        let mut s = String::new();
        s.push_str(&d.name);
        if !d.type_params.is_empty() {
            s.push('[');
            for (i, (x, b)) in d.type_params.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(x);
                if !b.is_object() {
                    s.push_str(" <: ");
                    self.w_type(&mut s, b);
                }
            }
            s.push(']');
        }
        if !d.parents.is_empty() {
            s.push_str(" <|");
            for p in &d.parents {
                s.push(' ');
                self.w_nominal(&mut s, p);
            }
        }
        s.push_str(" {\n");
        for (m, md) in &d.methods {
            s.push_str("  ");
            self.w_method(&mut s, m, md, true);
            s.push('\n');
        }
        s.push('}');
        s
    }

    /// A whole source file: aliases, declarations, then `main`.
    pub fn source(&self, src: &Source) -> String {
        let mut s = String::new();
        for (n, t) in &src.aliases.types {
            let _ = writeln!(s, "type {n} = {}", Printer::plain().ty(t));
        }
        for (n, v) in &src.aliases.values {
            let _ = writeln!(s, "{n} = {}", Printer::plain().value(v));
        }
        for d in src.program.decls.values() {
            s.push_str(&self.decl(d));
            s.push('\n');
        }
        if let Some(m) = &src.main {
            let _ = writeln!(s, "main = {}", self.expr(m));
        }
        s
    }
}

pub fn show_type(t: &Type) -> String {
    Printer::plain().ty(t)
}

pub fn show_effect(e: &Effect) -> String {
    Printer::plain().effect(e)
}

pub fn show_mt(mt: &MethodTypeEffect) -> String {
    Printer::plain().mt(mt)
}

pub fn show_nominal(n: &NominalType) -> String {
    let mut s = String::new();
    Printer::plain().w_nominal(&mut s, n);
    s
}

pub fn show_value(v: &Value) -> String {
    Printer::plain().value(v)
}

pub fn show_expr(e: &Expr) -> String {
    Printer::plain().expr(e)
}
