//! Backend term optimizations: eta contraction for conditionals and arrays,
//! and order-preserving linear inlining of let bindings.

use crate::ast::{alpha_eq, count_free, free_vars, subst, ObjTerm};
use crate::consts::Const;

/// Exhaustively applies the two eta rules:
/// `if L then M else M  ~>  M` (branches alpha-equal) and
/// `mkArr (lnArr M) (\i -> ixArr M i)  ~>  M`.
pub fn eta_contract(t: &ObjTerm) -> ObjTerm {
    let rebuilt = map_children(t, &eta_contract);
    match &rebuilt {
        ObjTerm::If { then, els, .. } if alpha_eq(then, els) => (**then).clone(),
        ObjTerm::ConstApp {
            c: Const::MkArr,
            args,
            ..
        } => {
            if let [ObjTerm::ConstApp {
                c: Const::LnArr,
                args: ln_args,
                ..
            }, ObjTerm::Lam { binder, body, .. }] = args.as_slice()
            {
                if let ObjTerm::ConstApp {
                    c: Const::IxArr,
                    args: ix_args,
                    ..
                } = body.as_ref()
                {
                    let source = &ln_args[0];
                    if alpha_eq(&ix_args[0], source)
                        && ix_args[1] == ObjTerm::var(binder.clone())
                        && !free_vars(source).contains(binder)
                    {
                        return eta_contract(source);
                    }
                }
            }
            rebuilt
        }
        _ => rebuilt,
    }
}

/// Inlines `let x = M in N` when `x` occurs exactly once and the occurrence
/// is not under a lambda or a conditional/case branch, and no other binding
/// is skipped over on the way (the path may pass through operands,
/// scrutinees, and let right-hand sides only). This preserves both the order
/// of evaluation and the amount of work.
pub fn inline_linear(t: &ObjTerm) -> ObjTerm {
    let rebuilt = map_children(t, &inline_linear);
    if let ObjTerm::Let {
        binder, rhs, body, ..
    } = &rebuilt
    {
        if count_free(body, binder) == 1 && path_transparent(body, binder) {
            return inline_linear(&subst(body, binder, rhs));
        }
    }
    rebuilt
}

// True when the unique occurrence of `x` is reachable without crossing a
// lambda, a branch, or another let's body.
fn path_transparent(t: &ObjTerm, x: &str) -> bool {
    if let ObjTerm::Var(y) = t {
        return y == x;
    }
    let here = |sub: &ObjTerm| count_free(sub, x) == 1;
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) | ObjTerm::Lam { .. } => false,
        ObjTerm::ConstApp { args, .. } => args
            .iter()
            .find(|a| here(a))
            .map(|a| !matches!(a, ObjTerm::Lam { .. }) && path_transparent(a, x))
            .unwrap_or(false),
        ObjTerm::App(f, a) => {
            if here(f) {
                path_transparent(f, x)
            } else {
                path_transparent(a, x)
            }
        }
        ObjTerm::Let { rhs, body, .. } => {
            // Descending into the body would skip over this binding.
            if here(rhs) {
                path_transparent(rhs, x)
            } else {
                let _ = body;
                false
            }
        }
        ObjTerm::Pair(a, b) => {
            if here(a) {
                path_transparent(a, x)
            } else {
                path_transparent(b, x)
            }
        }
        ObjTerm::Fst(p) | ObjTerm::Snd(p) => path_transparent(p, x),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => {
            path_transparent(payload, x)
        }
        ObjTerm::Case { scrut, .. } => here(scrut) && path_transparent(scrut, x),
        ObjTerm::If { cond, .. } => here(cond) && path_transparent(cond, x),
    }
}

fn map_children(t: &ObjTerm, f: &impl Fn(&ObjTerm) -> ObjTerm) -> ObjTerm {
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
        ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
            c: *c,
            inst: inst.clone(),
            args: args.iter().map(f).collect(),
        },
        ObjTerm::Lam { binder, ty, body } => ObjTerm::Lam {
            binder: binder.clone(),
            ty: ty.clone(),
            body: Box::new(f(body)),
        },
        ObjTerm::App(l, r) => ObjTerm::app(f(l), f(r)),
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => ObjTerm::Let {
            binder: binder.clone(),
            ty: ty.clone(),
            rhs: Box::new(f(rhs)),
            body: Box::new(f(body)),
        },
        ObjTerm::Pair(a, b) => ObjTerm::pair(f(a), f(b)),
        ObjTerm::Fst(p) => ObjTerm::fst(f(p)),
        ObjTerm::Snd(p) => ObjTerm::snd(f(p)),
        ObjTerm::Inl { payload, sum } => ObjTerm::inl(f(payload), sum.clone()),
        ObjTerm::Inr { payload, sum } => ObjTerm::inr(f(payload), sum.clone()),
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => ObjTerm::Case {
            scrut: Box::new(f(scrut)),
            left_binder: left_binder.clone(),
            left_ty: left_ty.clone(),
            left: Box::new(f(left)),
            right_binder: right_binder.clone(),
            right_ty: right_ty.clone(),
            right: Box::new(f(right)),
        },
        ObjTerm::If { cond, then, els } => ObjTerm::if_(f(cond), f(then), f(els)),
    }
}
