//! Canonical textual form for object terms and types.
//!
//! The printer emits the same concrete grammar the parser accepts, so
//! `--dump-phase` output and golden files can be re-read. Type annotations
//! are not printed; reconstruction recovers them.

use std::fmt::Write;

use crate::ast::{Lit, ObjTerm, ObjType};
use crate::consts::Const;

pub fn pretty_type(ty: &ObjType) -> String {
    let mut s = String::new();
    ty_prec(ty, 0, &mut s);
    s
}

// 0: arrow (right assoc), 1: sum, 2: atom
fn ty_prec(ty: &ObjType, prec: u8, out: &mut String) {
    match ty {
        ObjType::Base(b) => {
            let _ = write!(out, "{b}");
        }
        ObjType::Fun(d, c) => {
            if prec > 0 {
                out.push('(');
            }
            ty_prec(d, 1, out);
            out.push_str(" -> ");
            ty_prec(c, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
        ObjType::Sum(l, r) => {
            if prec > 1 {
                out.push('(');
            }
            ty_prec(l, 2, out);
            out.push_str(" + ");
            ty_prec(r, 2, out);
            if prec > 1 {
                out.push(')');
            }
        }
        ObjType::Prod(l, r) => {
            out.push('(');
            ty_prec(l, 0, out);
            out.push_str(", ");
            ty_prec(r, 0, out);
            out.push(')');
        }
        ObjType::Array(e) => {
            if prec > 1 {
                out.push('(');
            }
            out.push_str("Arr ");
            ty_prec(e, 2, out);
            if prec > 1 {
                out.push(')');
            }
        }
    }
}

pub fn pretty_term(t: &ObjTerm) -> String {
    let mut s = String::new();
    term_prec(&display_renamed(t), 0, &mut s);
    s
}

/// Renames supply-generated binders (which carry a `%` the grammar does not
/// accept) to readable identifiers, keeping the term parseable and
/// alpha-equal. Free variables are never touched.
fn display_renamed(t: &ObjTerm) -> ObjTerm {
    use std::collections::HashSet;

    fn pick(hint: &str, used: &mut HashSet<String>) -> String {
        let base: String = match hint.split('%').next() {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => "v".to_string(),
        };
        let mut name = base.clone();
        let mut i = 1;
        while !used.insert(name.clone()) {
            name = format!("{base}{i}");
            i += 1;
        }
        name
    }

    fn go(
        t: &ObjTerm,
        map: &mut Vec<(String, String)>,
        used: &mut HashSet<String>,
    ) -> ObjTerm {
        match t {
            ObjTerm::Var(x) => {
                for (old, new) in map.iter().rev() {
                    if old == x {
                        return ObjTerm::var(new.clone());
                    }
                }
                t.clone()
            }
            ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args.iter().map(|a| go(a, map, used)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                let fresh = pick(binder, used);
                map.push((binder.clone(), fresh.clone()));
                let body = go(body, map, used);
                map.pop();
                ObjTerm::Lam {
                    binder: fresh,
                    ty: ty.clone(),
                    body: Box::new(body),
                }
            }
            ObjTerm::App(f, a) => ObjTerm::app(go(f, map, used), go(a, map, used)),
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let rhs = go(rhs, map, used);
                let fresh = pick(binder, used);
                map.push((binder.clone(), fresh.clone()));
                let body = go(body, map, used);
                map.pop();
                ObjTerm::Let {
                    binder: fresh,
                    ty: ty.clone(),
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                }
            }
            ObjTerm::Pair(a, b) => ObjTerm::pair(go(a, map, used), go(b, map, used)),
            ObjTerm::Fst(p) => ObjTerm::fst(go(p, map, used)),
            ObjTerm::Snd(p) => ObjTerm::snd(go(p, map, used)),
            ObjTerm::Inl { payload, sum } => ObjTerm::inl(go(payload, map, used), sum.clone()),
            ObjTerm::Inr { payload, sum } => ObjTerm::inr(go(payload, map, used), sum.clone()),
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => {
                let scrut = go(scrut, map, used);
                let lf = pick(left_binder, used);
                map.push((left_binder.clone(), lf.clone()));
                let left = go(left, map, used);
                map.pop();
                let rf = pick(right_binder, used);
                map.push((right_binder.clone(), rf.clone()));
                let right = go(right, map, used);
                map.pop();
                ObjTerm::Case {
                    scrut: Box::new(scrut),
                    left_binder: lf,
                    left_ty: left_ty.clone(),
                    left: Box::new(left),
                    right_binder: rf,
                    right_ty: right_ty.clone(),
                    right: Box::new(right),
                }
            }
            ObjTerm::If { cond, then, els } => ObjTerm::if_(
                go(cond, map, used),
                go(then, map, used),
                go(els, map, used),
            ),
        }
    }

    let mut used: HashSet<String> = crate::ast::free_vars(t).into_iter().collect();
    // Reserve grammar keywords and constant names so a renamed binder never
    // collides with them.
    for kw in [
        "let", "in", "if", "then", "else", "case", "of", "do", "fst", "snd", "div", "mod",
        "even", "odd", "return", "maybe",
    ] {
        used.insert(kw.to_string());
    }
    for c in crate::consts::Const::ALL {
        used.insert(c.name().to_string());
    }
    go(t, &mut Vec::new(), &mut used)
}

fn lit_str(l: &Lit) -> String {
    match l {
        Lit::Bool(true) => "True".to_string(),
        Lit::Bool(false) => "False".to_string(),
        Lit::Int(n) => n.to_string(),
        Lit::Float(x) => {
            let s = format!("{x:?}");
            if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
                s
            } else {
                format!("{s}.0")
            }
        }
        Lit::Unit => "()".to_string(),
    }
}

fn infix_of(c: Const) -> Option<(&'static str, u8)> {
    // (symbol, precedence); comparisons 1, additive 2, multiplicative 3
    match c {
        Const::Eq => Some(("==", 1)),
        Const::Lt => Some(("<", 1)),
        Const::Add => Some(("+", 2)),
        Const::Sub => Some(("-", 2)),
        Const::Mul => Some(("*", 3)),
        Const::Div => Some(("/", 3)),
        _ => None,
    }
}

// Precedences: 0 binder forms, 1 comparisons, 2 additive, 3 multiplicative,
// 4 application, 5 atoms.
fn term_prec(t: &ObjTerm, prec: u8, out: &mut String) {
    match t {
        ObjTerm::Var(x) => out.push_str(x),
        ObjTerm::Lit(l) => {
            let neg = matches!(l, Lit::Int(n) if *n < 0)
                || matches!(l, Lit::Float(x) if *x < 0.0);
            if neg && prec > 0 {
                let _ = write!(out, "({})", lit_str(l));
            } else {
                out.push_str(&lit_str(l));
            }
        }
        ObjTerm::ConstApp { c, args, .. } => {
            if let Some((sym, p)) = infix_of(*c) {
                if prec > p {
                    out.push('(');
                }
                term_prec(&args[0], p, out);
                let _ = write!(out, " {sym} ");
                term_prec(&args[1], p + 1, out);
                if prec > p {
                    out.push(')');
                }
            } else {
                if prec > 4 {
                    out.push('(');
                }
                out.push_str(c.name());
                for a in args {
                    out.push(' ');
                    term_prec(a, 5, out);
                }
                if prec > 4 {
                    out.push(')');
                }
            }
        }
        ObjTerm::Lam { binder, body, .. } => {
            if prec > 0 {
                out.push('(');
            }
            let _ = write!(out, "\\{binder} -> ");
            term_prec(body, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
        ObjTerm::App(f, a) => {
            if prec > 4 {
                out.push('(');
            }
            term_prec(f, 4, out);
            out.push(' ');
            term_prec(a, 5, out);
            if prec > 4 {
                out.push(')');
            }
        }
        ObjTerm::Let {
            binder, rhs, body, ..
        } => {
            if prec > 0 {
                out.push('(');
            }
            let _ = write!(out, "let {binder} = ");
            term_prec(rhs, 0, out);
            out.push_str(" in ");
            term_prec(body, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
        ObjTerm::Pair(a, b) => {
            out.push('(');
            term_prec(a, 0, out);
            out.push_str(", ");
            term_prec(b, 0, out);
            out.push(')');
        }
        ObjTerm::Fst(x) => {
            if prec > 4 {
                out.push('(');
            }
            out.push_str("fst ");
            term_prec(x, 5, out);
            if prec > 4 {
                out.push(')');
            }
        }
        ObjTerm::Snd(x) => {
            if prec > 4 {
                out.push('(');
            }
            out.push_str("snd ");
            term_prec(x, 5, out);
            if prec > 4 {
                out.push(')');
            }
        }
        ObjTerm::Inl { payload, .. } => {
            if prec > 4 {
                out.push('(');
            }
            out.push_str("Inl ");
            term_prec(payload, 5, out);
            if prec > 4 {
                out.push(')');
            }
        }
        ObjTerm::Inr { payload, .. } => {
            if prec > 4 {
                out.push('(');
            }
            out.push_str("Inr ");
            term_prec(payload, 5, out);
            if prec > 4 {
                out.push(')');
            }
        }
        ObjTerm::Case {
            scrut,
            left_binder,
            left,
            right_binder,
            right,
            ..
        } => {
            if prec > 0 {
                out.push('(');
            }
            out.push_str("case ");
            term_prec(scrut, 1, out);
            let _ = write!(out, " of {{ Inl {left_binder} -> ");
            term_prec(left, 0, out);
            let _ = write!(out, " ; Inr {right_binder} -> ");
            term_prec(right, 0, out);
            out.push_str(" }");
            if prec > 0 {
                out.push(')');
            }
        }
        ObjTerm::If { cond, then, els } => {
            if prec > 0 {
                out.push('(');
            }
            out.push_str("if ");
            term_prec(cond, 1, out);
            out.push_str(" then ");
            term_prec(then, 1, out);
            out.push_str(" else ");
            term_prec(els, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
    }
}
