//! Purely syntactic sugar elimination.
//!
//! `do` blocks, the Maybe forms, `Vec` construction and patterns, pair
//! patterns, composition, and negation all disappear here; the output is the
//! core surface language (checked by `Expr::is_core`). Maybe is expanded
//! before normalization ever runs, so the normalizer sees ordinary sums.

use crate::diag::{codes, Diagnostic, Pos, Result};
use crate::surface::{BinOp, DoStmt, Expr, ExprKind, Pat, SourceModule};

#[derive(Default)]
struct Fresh {
    n: u64,
}

impl Fresh {
    fn name(&mut self, hint: &str) -> String {
        let n = self.n;
        self.n += 1;
        format!("{hint}%s{n}")
    }
}

pub fn desugar_module(m: &SourceModule) -> Result<SourceModule> {
    let mut fresh = Fresh::default();
    let mut defs = Vec::with_capacity(m.defs.len());
    for d in &m.defs {
        let body = desugar_expr(&d.body, &mut fresh)?;
        debug_assert!(body.is_core(), "desugar left sugar in `{}`", d.name);
        defs.push(crate::surface::Def {
            pos: d.pos,
            name: d.name.clone(),
            ascription: d.ascription.clone(),
            body,
        });
    }
    Ok(SourceModule {
        defs,
        entry: m.entry.clone(),
    })
}

/// Desugars a standalone expression, as used for golden terms.
pub fn desugar_bare(e: &Expr) -> Result<Expr> {
    desugar_expr(e, &mut Fresh::default())
}

fn desugar_expr(e: &Expr, fresh: &mut Fresh) -> Result<Expr> {
    let pos = e.pos;
    let kind = match &e.kind {
        ExprKind::Var(_)
        | ExprKind::Int(_)
        | ExprKind::Float(_)
        | ExprKind::Bool(_)
        | ExprKind::Unit => e.kind.clone(),

        ExprKind::Lam(pats, body) => {
            let body = desugar_expr(body, fresh)?;
            return Ok(desugar_lambda(pos, pats, body, fresh));
        }
        ExprKind::App(f, a) => ExprKind::App(
            Box::new(desugar_expr(f, fresh)?),
            Box::new(desugar_expr(a, fresh)?),
        ),
        ExprKind::Bin(op, a, b) => ExprKind::Bin(
            *op,
            Box::new(desugar_expr(a, fresh)?),
            Box::new(desugar_expr(b, fresh)?),
        ),
        ExprKind::Builtin(b, args) => ExprKind::Builtin(
            *b,
            args.iter()
                .map(|a| desugar_expr(a, fresh))
                .collect::<Result<_>>()?,
        ),
        ExprKind::If(c, t, f) => ExprKind::If(
            Box::new(desugar_expr(c, fresh)?),
            Box::new(desugar_expr(t, fresh)?),
            Box::new(desugar_expr(f, fresh)?),
        ),
        ExprKind::Let(x, rhs, body) => ExprKind::Let(
            x.clone(),
            Box::new(desugar_expr(rhs, fresh)?),
            Box::new(desugar_expr(body, fresh)?),
        ),
        ExprKind::Pair(a, b) => ExprKind::Pair(
            Box::new(desugar_expr(a, fresh)?),
            Box::new(desugar_expr(b, fresh)?),
        ),
        ExprKind::Fst(a) => ExprKind::Fst(Box::new(desugar_expr(a, fresh)?)),
        ExprKind::Snd(a) => ExprKind::Snd(Box::new(desugar_expr(a, fresh)?)),
        ExprKind::Inl(a) => ExprKind::Inl(Box::new(desugar_expr(a, fresh)?)),
        ExprKind::Inr(a) => ExprKind::Inr(Box::new(desugar_expr(a, fresh)?)),
        ExprKind::Case {
            scrut,
            left_binder,
            left,
            right_binder,
            right,
        } => ExprKind::Case {
            scrut: Box::new(desugar_expr(scrut, fresh)?),
            left_binder: left_binder.clone(),
            left: Box::new(desugar_expr(left, fresh)?),
            right_binder: right_binder.clone(),
            right: Box::new(desugar_expr(right, fresh)?),
        },
        ExprKind::Quote(b) => ExprKind::Quote(Box::new(desugar_expr(b, fresh)?)),
        ExprKind::Splice(b) => ExprKind::Splice(Box::new(desugar_expr(b, fresh)?)),

        // -- sugar --
        ExprKind::Neg(inner) => {
            let inner = desugar_expr(inner, fresh)?;
            match inner.kind {
                ExprKind::Int(v) => ExprKind::Int(-v),
                ExprKind::Float(v) => ExprKind::Float(-v),
                _ => ExprKind::Bin(
                    BinOp::Sub,
                    Box::new(Expr::new(pos, ExprKind::Int(0))),
                    Box::new(inner),
                ),
            }
        }
        ExprKind::Compose(f, g) => {
            let f = desugar_expr(f, fresh)?;
            let g = desugar_expr(g, fresh)?;
            let x = fresh.name("c");
            ExprKind::Lam(
                vec![Pat::Var(pos, x.clone())],
                Box::new(Expr::new(
                    pos,
                    ExprKind::App(
                        Box::new(f),
                        Box::new(Expr::new(
                            pos,
                            ExprKind::App(
                                Box::new(g),
                                Box::new(Expr::new(pos, ExprKind::Var(x))),
                            ),
                        )),
                    ),
                )),
            )
        }
        ExprKind::Nothing => ExprKind::Inl(Box::new(Expr::new(pos, ExprKind::Unit))),
        ExprKind::Just(a) | ExprKind::Return(a) => {
            ExprKind::Inr(Box::new(desugar_expr(a, fresh)?))
        }
        ExprKind::MaybeElim(d, f, m) => {
            let d = desugar_expr(d, fresh)?;
            let f = desugar_expr(f, fresh)?;
            let m = desugar_expr(m, fresh)?;
            let u = fresh.name("u");
            let y = fresh.name("y");
            ExprKind::Case {
                scrut: Box::new(m),
                left_binder: u,
                left: Box::new(d),
                right_binder: y.clone(),
                right: Box::new(Expr::new(
                    pos,
                    ExprKind::App(Box::new(f), Box::new(Expr::new(pos, ExprKind::Var(y)))),
                )),
            }
        }
        ExprKind::BindM(m, k) => return desugar_bind(pos, m, k, fresh),
        ExprKind::Do(stmts) => return desugar_do(pos, stmts, fresh),
        ExprKind::VecCon(n, f) => ExprKind::Pair(
            Box::new(desugar_expr(n, fresh)?),
            Box::new(desugar_expr(f, fresh)?),
        ),
    };
    Ok(Expr::new(pos, kind))
}

// e >>= k  ~>  case e of { Inl u -> Inl u ; Inr x -> k x }
fn desugar_bind(pos: Pos, m: &Expr, k: &Expr, fresh: &mut Fresh) -> Result<Expr> {
    let m = desugar_expr(m, fresh)?;
    let k = desugar_expr(k, fresh)?;
    let u = fresh.name("u");
    let x = fresh.name("x");
    Ok(Expr::new(
        pos,
        ExprKind::Case {
            scrut: Box::new(m),
            left_binder: u.clone(),
            left: Box::new(Expr::new(
                pos,
                ExprKind::Inl(Box::new(Expr::new(pos, ExprKind::Var(u)))),
            )),
            right_binder: x.clone(),
            right: Box::new(Expr::new(
                pos,
                ExprKind::App(Box::new(k), Box::new(Expr::new(pos, ExprKind::Var(x)))),
            )),
        },
    ))
}

fn desugar_do(pos: Pos, stmts: &[DoStmt], fresh: &mut Fresh) -> Result<Expr> {
    match stmts {
        [] => Err(Diagnostic::at(codes::DESUGAR, pos, "empty do block")),
        [DoStmt::Expr(e)] => desugar_expr(e, fresh),
        [DoStmt::Bind(p, _, _)] => Err(Diagnostic::at(
            codes::DESUGAR,
            *p,
            "do block must end with an expression",
        )),
        [DoStmt::Bind(p, x, e), rest @ ..] => {
            let k = Expr::new(
                *p,
                ExprKind::Lam(
                    vec![Pat::Var(*p, x.clone())],
                    Box::new(desugar_do(pos, rest, fresh)?),
                ),
            );
            desugar_bind(*p, e, &k, fresh)
        }
        [DoStmt::Expr(e), rest @ ..] => {
            let x = fresh.name("d");
            let k = Expr::new(
                e.pos,
                ExprKind::Lam(
                    vec![Pat::Var(e.pos, x)],
                    Box::new(desugar_do(pos, rest, fresh)?),
                ),
            );
            desugar_bind(e.pos, e, &k, fresh)
        }
    }
}

// Multi-parameter lambdas become nested single binders; composite patterns
// project through a fresh binder:
//   \(Vec n g) -> e   ~>   \p -> let n = fst p in let g = snd p in e
fn desugar_lambda(pos: Pos, pats: &[Pat], body: Expr, fresh: &mut Fresh) -> Expr {
    let mut out = body;
    for pat in pats.iter().rev() {
        out = match pat {
            Pat::Var(p, x) => Expr::new(
                pos,
                ExprKind::Lam(vec![Pat::Var(*p, x.clone())], Box::new(out)),
            ),
            composite => {
                let p = fresh.name("p");
                let scrut = Expr::new(composite.pos(), ExprKind::Var(p.clone()));
                let expanded = expand_pattern(composite, scrut, out, fresh);
                Expr::new(
                    pos,
                    ExprKind::Lam(vec![Pat::Var(composite.pos(), p)], Box::new(expanded)),
                )
            }
        };
    }
    out
}

fn expand_pattern(pat: &Pat, scrut: Expr, body: Expr, fresh: &mut Fresh) -> Expr {
    let pos = pat.pos();
    match pat {
        Pat::Var(_, x) => Expr::new(
            pos,
            ExprKind::Let(x.clone(), Box::new(scrut), Box::new(body)),
        ),
        Pat::Vec(_, n, g) => {
            let fst = Expr::new(pos, ExprKind::Fst(Box::new(scrut.clone())));
            let snd = Expr::new(pos, ExprKind::Snd(Box::new(scrut)));
            Expr::new(
                pos,
                ExprKind::Let(
                    n.clone(),
                    Box::new(fst),
                    Box::new(Expr::new(
                        pos,
                        ExprKind::Let(g.clone(), Box::new(snd), Box::new(body)),
                    )),
                ),
            )
        }
        Pat::Pair(_, a, b) => {
            // Bind the scrutinee when it is not already a variable, then
            // project componentwise.
            let (scrut_var, wrap): (Expr, Option<(String, Expr)>) = match &scrut.kind {
                ExprKind::Var(_) => (scrut, None),
                _ => {
                    let q = fresh.name("q");
                    (
                        Expr::new(pos, ExprKind::Var(q.clone())),
                        Some((q, scrut)),
                    )
                }
            };
            let fst = Expr::new(pos, ExprKind::Fst(Box::new(scrut_var.clone())));
            let snd = Expr::new(pos, ExprKind::Snd(Box::new(scrut_var.clone())));
            let inner = expand_pattern(b, snd, body, fresh);
            let both = expand_pattern(a, fst, inner, fresh);
            match wrap {
                None => both,
                Some((q, rhs)) => Expr::new(
                    pos,
                    ExprKind::Let(q, Box::new(rhs), Box::new(both)),
                ),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_module;

    fn desugared(src: &str) -> SourceModule {
        desugar_module(&parse_module(src).unwrap()).unwrap()
    }

    fn count_sugar(e: &Expr) -> usize {
        usize::from(!e.is_core())
    }

    #[test]
    fn do_block_becomes_case() {
        let m = desugared("f = [|| \\x -> do { y <- p x ; return (1 / y) } ||]\n");
        let body = &m.defs[0].body;
        assert_eq!(count_sugar(body), 0);
        // Shape: quote of \x -> case (p x) of { Inl u -> Inl u ; Inr y -> Inr (1/y) }
        match &body.kind {
            ExprKind::Quote(q) => match &q.kind {
                ExprKind::Lam(_, b) => match &b.kind {
                    ExprKind::Case { left, right, .. } => {
                        assert!(matches!(left.kind, ExprKind::Inl(_)));
                        match &right.kind {
                            ExprKind::App(k, _) => {
                                assert!(matches!(k.kind, ExprKind::Lam(_, _)))
                            }
                            other => panic!("unexpected {other:?}"),
                        }
                    }
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nothing_becomes_inl_unit() {
        let m = desugared("f = [|| \\x -> Nothing ||]\n");
        match &m.defs[0].body.kind {
            ExprKind::Quote(q) => match &q.kind {
                ExprKind::Lam(_, b) => match &b.kind {
                    ExprKind::Inl(u) => assert!(matches!(u.kind, ExprKind::Unit)),
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vec_pattern_projects() {
        let m = desugared("fromVec = [|| \\(Vec n g) -> mkArr n g ||]\n");
        match &m.defs[0].body.kind {
            ExprKind::Quote(q) => match &q.kind {
                ExprKind::Lam(pats, b) => {
                    assert!(matches!(pats[0], Pat::Var(_, _)));
                    // let n = fst p in let g = snd p in mkArr n g
                    match &b.kind {
                        ExprKind::Let(n, rhs, inner) => {
                            assert_eq!(n, "n");
                            assert!(matches!(rhs.kind, ExprKind::Fst(_)));
                            assert!(matches!(inner.kind, ExprKind::Let(_, _, _)));
                        }
                        other => panic!("unexpected {other:?}"),
                    }
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn desugar_is_idempotent() {
        let srcs = [
            "f = [|| \\x -> do { y <- p x ; return (1 / y) } ||]\n",
            "g = [|| \\(Vec n h) i (a, b) -> Vec n (\\j -> h j + a + b + i) ||]\n",
            "h = [|| $$a . $$b ||]\n",
            "k = maybe 1 (\\y -> y) Nothing\n",
        ];
        for src in srcs {
            let once = desugared(src);
            let twice = desugar_module(&once).unwrap();
            for (a, b) in once.defs.iter().zip(&twice.defs) {
                assert_eq!(a.body, b.body, "not idempotent for {src}");
            }
        }
    }

    #[test]
    fn composition_becomes_lambda() {
        let m = desugared("h = [|| $$a . $$b ||]\n");
        match &m.defs[0].body.kind {
            ExprKind::Quote(q) => match &q.kind {
                ExprKind::Lam(_, b) => match &b.kind {
                    ExprKind::App(f, inner) => {
                        assert!(matches!(f.kind, ExprKind::Splice(_)));
                        assert!(matches!(inner.kind, ExprKind::App(_, _)));
                    }
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }
}
