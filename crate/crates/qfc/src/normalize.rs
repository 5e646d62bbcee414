//! Sharing-preserving normalization.
//!
//! Preprocessing saturates under-applied constants. Phase 1 names non-value
//! eliminator operands and floats `let` out of evaluation frames (ANF-style
//! let-insertion plus the let/let reassociation). Phase 2 applies beta rules
//! — introductions met by eliminations — together with the commuting
//! conversions that push eliminators into `let`, `case`, and `if`, until no
//! redex remains. Phase 3 garbage-collects unused bindings and is skipped
//! when the target semantics is call-by-value.
//!
//! Beta reduction introduces `let` rather than substituting eagerly; the
//! `let` rule substitutes a binding when the bound term is a value, when the
//! variable occurs exactly once, or when its type is not representable (such
//! bindings cannot survive into first-order code, so they are unfolded even
//! at the cost of duplication — this is what eliminates every pull-array
//! pair and Maybe sum). Representable bindings used more than once are kept,
//! which preserves sharing of computations.
//!
//! Constants are never unfolded; in particular `save` has no rule.

use crate::ast::{
    self, binders_unique, count_free, is_representable, is_value, type_of_with, NameSupply,
    ObjTerm, ObjType, TypeEnv,
};
use crate::diag::{codes, Diagnostic, Result};

pub const DEFAULT_NORM_FUEL: u64 = 1_000_000;

/// Call-by-need runs all three phases; call-by-value omits the garbage
/// collection of unused bindings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Need,
    Value,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NormStats {
    pub phase1_steps: u64,
    pub phase2_steps: u64,
    pub phase3_steps: u64,
    pub fuel_limit: u64,
    pub result_size: usize,
}

impl NormStats {
    pub fn total_steps(&self) -> u64 {
        self.phase1_steps + self.phase2_steps + self.phase3_steps
    }
}

/// Eta-expands every under-applied constant occurrence `c M1..Mj` (j < k)
/// into `\x_{j+1} ... x_k -> c M1..Mj x_{j+1}..x_k` and groups saturated
/// spines into constant applications. Extra arguments beyond the arity stay
/// ordinary applications, so `save L M` becomes `(save L) M`. Binders
/// shadow constant names.
pub fn preprocess(t: &ObjTerm, supply: &mut NameSupply) -> ObjTerm {
    fn spine(t: &ObjTerm) -> (&ObjTerm, Vec<&ObjTerm>) {
        let mut head = t;
        let mut args = Vec::new();
        while let ObjTerm::App(f, a) = head {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        (head, args)
    }

    fn go(t: &ObjTerm, bound: &mut Vec<String>, supply: &mut NameSupply) -> ObjTerm {
        let (head, args) = spine(t);
        if let ObjTerm::Var(name) = head {
            if !bound.iter().any(|b| b == name) {
                if let Some(c) = crate::consts::Const::by_name(name) {
                    let arity = c.arity();
                    let mut done: Vec<ObjTerm> =
                        args.iter().map(|a| go(a, bound, supply)).collect();
                    if done.len() >= arity {
                        let rest = done.split_off(arity);
                        let mut out = ObjTerm::const_app(c, done);
                        for r in rest {
                            out = ObjTerm::app(out, r);
                        }
                        return out;
                    }
                    let missing = arity - done.len();
                    let binders: Vec<String> =
                        (0..missing).map(|_| supply.fresh("e")).collect();
                    for b in &binders {
                        done.push(ObjTerm::var(b.clone()));
                    }
                    let mut out = ObjTerm::const_app(c, done);
                    for b in binders.into_iter().rev() {
                        out = ObjTerm::lam(b, out);
                    }
                    return out;
                }
            }
        }
        // No constant head: rebuild structurally.
        match t {
            ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
            ObjTerm::App(f, a) => ObjTerm::app(go(f, bound, supply), go(a, bound, supply)),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args.iter().map(|a| go(a, bound, supply)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                bound.push(binder.clone());
                let body = go(body, bound, supply);
                bound.pop();
                ObjTerm::Lam {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    body: Box::new(body),
                }
            }
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let rhs = go(rhs, bound, supply);
                bound.push(binder.clone());
                let body = go(body, bound, supply);
                bound.pop();
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                }
            }
            ObjTerm::Pair(a, b) => ObjTerm::pair(go(a, bound, supply), go(b, bound, supply)),
            ObjTerm::Fst(p) => ObjTerm::fst(go(p, bound, supply)),
            ObjTerm::Snd(p) => ObjTerm::snd(go(p, bound, supply)),
            ObjTerm::Inl { payload, sum } => {
                ObjTerm::inl(go(payload, bound, supply), sum.clone())
            }
            ObjTerm::Inr { payload, sum } => {
                ObjTerm::inr(go(payload, bound, supply), sum.clone())
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => {
                let scrut = go(scrut, bound, supply);
                bound.push(left_binder.clone());
                let left = go(left, bound, supply);
                bound.pop();
                bound.push(right_binder.clone());
                let right = go(right, bound, supply);
                bound.pop();
                ObjTerm::Case {
                    scrut: Box::new(scrut),
                    left_binder: left_binder.clone(),
                    left_ty: left_ty.clone(),
                    left: Box::new(left),
                    right_binder: right_binder.clone(),
                    right_ty: right_ty.clone(),
                    right: Box::new(right),
                }
            }
            ObjTerm::If { cond, then, els } => ObjTerm::if_(
                go(cond, bound, supply),
                go(then, bound, supply),
                go(els, bound, supply),
            ),
        }
    }

    go(t, &mut Vec::new(), supply)
}

/// Where the linear let-substitution may move a binding. `Everywhere` is the
/// main normalizer's behavior; the backend's renormalization restricts it to
/// transparent paths so re-running the backend is a fixed point.
#[derive(Clone, Copy, PartialEq)]
pub enum LinearMode {
    Everywhere,
    PathRestricted,
}

/// True when the unique occurrence of `x` in `t` is reachable without
/// crossing a lambda, an if/case branch, or another let's body.
pub fn path_transparent(t: &ObjTerm, x: &str) -> bool {
    if let ObjTerm::Var(y) = t {
        return y == x;
    }
    let here = |sub: &ObjTerm| count_free(sub, x) == 1;
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) | ObjTerm::Lam { .. } => false,
        ObjTerm::ConstApp { args, .. } => args
            .iter()
            .find(|a| here(a))
            .map(|a| path_transparent(a, x))
            .unwrap_or(false),
        ObjTerm::App(f, a) => {
            if here(f) {
                path_transparent(f, x)
            } else {
                path_transparent(a, x)
            }
        }
        ObjTerm::Let { rhs, .. } => here(rhs) && path_transparent(rhs, x),
        ObjTerm::Pair(a, b) => {
            if here(a) {
                path_transparent(a, x)
            } else {
                path_transparent(b, x)
            }
        }
        ObjTerm::Fst(p) | ObjTerm::Snd(p) => path_transparent(p, x),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => path_transparent(payload, x),
        ObjTerm::Case { scrut, .. } => here(scrut) && path_transparent(scrut, x),
        ObjTerm::If { cond, .. } => here(cond) && path_transparent(cond, x),
    }
}

struct Ctx<'a> {
    env: &'a TypeEnv,
    supply: &'a mut NameSupply,
    fuel: &'a mut u64,
    steps: u64,
    linear: LinearMode,
}

impl<'a> Ctx<'a> {
    fn spend(&mut self) -> Result<()> {
        if *self.fuel == 0 {
            return Err(Diagnostic::new(
                codes::NORM_FUEL,
                "normalization step budget exhausted",
            ));
        }
        *self.fuel -= 1;
        self.steps += 1;
        Ok(())
    }

    /// Type of a subterm at the current binding context.
    fn ty(&self, t: &ObjTerm, locals: &[(String, ObjType)]) -> ObjType {
        type_of_with(t, self.env, locals)
    }

    /// A copy of `v` with all binders renamed fresh, for duplicating
    /// substitution and commuting conversions.
    fn refreshed(&mut self, v: &ObjTerm) -> ObjTerm {
        ast::uniquify(v, self.supply)
    }

    /// Substitute `v` for `x` in `body`, freshening binders per occurrence
    /// so binder uniqueness is maintained.
    fn subst_fresh(&mut self, body: &ObjTerm, x: &str, v: &ObjTerm) -> ObjTerm {
        let n = count_free(body, x);
        if n <= 1 {
            return ast::subst(body, x, v);
        }
        // Multiple occurrences: each gets a freshened copy.
        self.subst_each(body, x, v)
    }

    fn subst_each(&mut self, t: &ObjTerm, x: &str, v: &ObjTerm) -> ObjTerm {
        match t {
            ObjTerm::Var(y) if y == x => self.refreshed(v),
            ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args.iter().map(|a| self.subst_each(a, x, v)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                // Binders are globally unique, so no shadowing or capture.
                debug_assert_ne!(binder, x);
                ObjTerm::Lam {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    body: Box::new(self.subst_each(body, x, v)),
                }
            }
            ObjTerm::App(f, a) => {
                ObjTerm::app(self.subst_each(f, x, v), self.subst_each(a, x, v))
            }
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                debug_assert_ne!(binder, x);
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new(self.subst_each(rhs, x, v)),
                    body: Box::new(self.subst_each(body, x, v)),
                }
            }
            ObjTerm::Pair(a, b) => {
                ObjTerm::pair(self.subst_each(a, x, v), self.subst_each(b, x, v))
            }
            ObjTerm::Fst(p) => ObjTerm::fst(self.subst_each(p, x, v)),
            ObjTerm::Snd(p) => ObjTerm::snd(self.subst_each(p, x, v)),
            ObjTerm::Inl { payload, sum } => {
                ObjTerm::inl(self.subst_each(payload, x, v), sum.clone())
            }
            ObjTerm::Inr { payload, sum } => {
                ObjTerm::inr(self.subst_each(payload, x, v), sum.clone())
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => ObjTerm::Case {
                scrut: Box::new(self.subst_each(scrut, x, v)),
                left_binder: left_binder.clone(),
                left_ty: left_ty.clone(),
                left: Box::new(self.subst_each(left, x, v)),
                right_binder: right_binder.clone(),
                right_ty: right_ty.clone(),
                right: Box::new(self.subst_each(right, x, v)),
            },
            ObjTerm::If { cond, then, els } => ObjTerm::if_(
                self.subst_each(cond, x, v),
                self.subst_each(then, x, v),
                self.subst_each(els, x, v),
            ),
        }
    }
}

/// Extracts a `Let` out of an evaluation-frame operand, or reassociates
/// nested lets. Returns the hoisted term. Shared by phases 1 and 2.
fn try_float_let(t: &ObjTerm) -> Option<ObjTerm> {
    fn hoist(op: &ObjTerm, rebuild: impl FnOnce(ObjTerm) -> ObjTerm) -> Option<ObjTerm> {
        if let ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } = op
        {
            Some(ObjTerm::Let {
                binder: binder.clone(),
                ty: ty.clone(),
                rhs: rhs.clone(),
                body: Box::new(rebuild((**body).clone())),
            })
        } else {
            None
        }
    }

    match t {
        ObjTerm::App(f, a) => hoist(f, |b| ObjTerm::app(b, (**a).clone()))
            .or_else(|| hoist(a, |b| ObjTerm::app((**f).clone(), b))),
        ObjTerm::ConstApp { c, inst, args } => {
            for (i, arg) in args.iter().enumerate() {
                if matches!(arg, ObjTerm::Let { .. }) {
                    let (c, inst, args) = (*c, inst.clone(), args.clone());
                    return hoist(arg, move |b| {
                        let mut args = args;
                        args[i] = b;
                        ObjTerm::ConstApp { c, inst, args }
                    });
                }
            }
            None
        }
        ObjTerm::Pair(a, b) => hoist(a, |x| ObjTerm::pair(x, (**b).clone()))
            .or_else(|| hoist(b, |x| ObjTerm::pair((**a).clone(), x))),
        ObjTerm::Inl { payload, sum } => {
            let sum = sum.clone();
            hoist(payload, move |b| ObjTerm::inl(b, sum))
        }
        ObjTerm::Inr { payload, sum } => {
            let sum = sum.clone();
            hoist(payload, move |b| ObjTerm::inr(b, sum))
        }
        ObjTerm::Fst(p) => hoist(p, ObjTerm::fst),
        ObjTerm::Snd(p) => hoist(p, ObjTerm::snd),
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => {
            let (lb, lt, l) = (left_binder.clone(), left_ty.clone(), left.clone());
            let (rb, rt, r) = (right_binder.clone(), right_ty.clone(), right.clone());
            hoist(scrut, move |b| ObjTerm::Case {
                scrut: Box::new(b),
                left_binder: lb,
                left_ty: lt,
                left: l,
                right_binder: rb,
                right_ty: rt,
                right: r,
            })
        }
        ObjTerm::If { cond, then, els } => {
            let (th, el) = (then.clone(), els.clone());
            hoist(cond, move |b| ObjTerm::If {
                cond: Box::new(b),
                then: th,
                els: el,
            })
        }
        // let y = (let x = L in M) in N  ~>  let x = L in let y = M in N
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => {
            if let ObjTerm::Let {
                binder: xb,
                ty: xt,
                rhs: xr,
                body: xbody,
            } = rhs.as_ref()
            {
                Some(ObjTerm::Let {
                    binder: xb.clone(),
                    ty: xt.clone(),
                    rhs: xr.clone(),
                    body: Box::new(ObjTerm::Let {
                        binder: binder.clone(),
                        ty: ty.clone(),
                        rhs: xbody.clone(),
                        body: body.clone(),
                    }),
                })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Phase-1 naming: replaces a non-value eliminator operand with a fresh
/// let-bound variable. Constant and constructor operands are left in place;
/// the worked normal forms keep nested constant applications inline.
fn try_name_operand(
    t: &ObjTerm,
    ctx: &mut Ctx,
    locals: &[(String, ObjType)],
) -> Option<ObjTerm> {
    fn needs_name(op: &ObjTerm) -> bool {
        !is_value(op) && !matches!(op, ObjTerm::Let { .. })
    }

    let name_it = |ctx: &mut Ctx, op: &ObjTerm, rebuild: &dyn Fn(ObjTerm) -> ObjTerm| {
        let ty = ctx.ty(op, locals);
        let fresh = ctx.supply.fresh("t");
        Some(ObjTerm::Let {
            binder: fresh.clone(),
            ty: Some(ty),
            rhs: Box::new(op.clone()),
            body: Box::new(rebuild(ObjTerm::var(fresh))),
        })
    };

    match t {
        ObjTerm::App(f, a) if needs_name(a) => {
            let f = f.clone();
            name_it(ctx, a, &move |v| ObjTerm::App(f.clone(), Box::new(v)))
        }
        ObjTerm::Fst(p) if needs_name(p) => name_it(ctx, p, &ObjTerm::fst),
        ObjTerm::Snd(p) if needs_name(p) => name_it(ctx, p, &ObjTerm::snd),
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } if needs_name(scrut) => {
            let (lb, lt, l) = (left_binder.clone(), left_ty.clone(), left.clone());
            let (rb, rt, r) = (right_binder.clone(), right_ty.clone(), right.clone());
            name_it(ctx, scrut, &move |v| ObjTerm::Case {
                scrut: Box::new(v),
                left_binder: lb.clone(),
                left_ty: lt.clone(),
                left: l.clone(),
                right_binder: rb.clone(),
                right_ty: rt.clone(),
                right: r.clone(),
            })
        }
        ObjTerm::If { cond, then, els } if needs_name(cond) => {
            let (th, el) = (then.clone(), els.clone());
            name_it(ctx, cond, &move |v| ObjTerm::If {
                cond: Box::new(v),
                then: th.clone(),
                els: el.clone(),
            })
        }
        _ => None,
    }
}

/// Beta rules: an introduction immediately met by its elimination.
/// Application and projection introduce sharing lets instead of substituting
/// non-values; the let rule decides substitution.
fn try_beta(t: &ObjTerm, ctx: &mut Ctx, locals: &[(String, ObjType)]) -> Option<ObjTerm> {
    match t {
        ObjTerm::App(f, a) => {
            if let ObjTerm::Lam { binder, ty, body } = f.as_ref() {
                return Some(ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new((**a).clone()),
                    body: body.clone(),
                });
            }
            None
        }
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => {
            // Values substitute unconditionally (dropping a dead value loses
            // no computation under either strategy). Non-values substitute
            // when linear, or when their type is not representable and they
            // therefore cannot survive into first-order code. Dead non-value
            // bindings are left for the garbage-collection phase.
            let occurrences = count_free(body, binder);
            let linear_ok = occurrences == 1
                && (ctx.linear == LinearMode::Everywhere || path_transparent(body, binder));
            let substitute = is_value(rhs)
                || linear_ok
                || (occurrences > 0 && ty.as_ref().is_some_and(|t| !is_representable(t)));
            if substitute {
                Some(ctx.subst_fresh(body, binder, rhs))
            } else {
                None
            }
        }
        ObjTerm::Fst(p) => match p.as_ref() {
            ObjTerm::Pair(a, b) => Some(project_pair(ctx, locals, a, b, true)),
            _ => None,
        },
        ObjTerm::Snd(p) => match p.as_ref() {
            ObjTerm::Pair(a, b) => Some(project_pair(ctx, locals, a, b, false)),
            _ => None,
        },
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => match scrut.as_ref() {
            ObjTerm::Inl { payload, .. } => Some(ObjTerm::Let {
                binder: left_binder.clone(),
                ty: left_ty.clone(),
                rhs: Box::new((**payload).clone()),
                body: left.clone(),
            }),
            ObjTerm::Inr { payload, .. } => Some(ObjTerm::Let {
                binder: right_binder.clone(),
                ty: right_ty.clone(),
                rhs: Box::new((**payload).clone()),
                body: right.clone(),
            }),
            _ => None,
        },
        ObjTerm::If { cond, then, els } => match cond.as_ref() {
            ObjTerm::Lit(crate::ast::Lit::Bool(true)) => Some((**then).clone()),
            ObjTerm::Lit(crate::ast::Lit::Bool(false)) => Some((**els).clone()),
            _ => None,
        },
        _ => None,
    }
}

// fst (M, N) keeps both components' evaluation as lets; the let rule then
// substitutes values and the garbage-collection phase drops the dead one
// under call-by-need.
fn project_pair(
    ctx: &mut Ctx,
    locals: &[(String, ObjType)],
    a: &ObjTerm,
    b: &ObjTerm,
    first: bool,
) -> ObjTerm {
    if is_value(a) && is_value(b) {
        return if first { a.clone() } else { b.clone() };
    }
    let ta = ctx.ty(a, locals);
    let tb = ctx.ty(b, locals);
    let xa = ctx.supply.fresh("t");
    let xb = ctx.supply.fresh("t");
    let result = ObjTerm::var(if first { xa.clone() } else { xb.clone() });
    ObjTerm::let_ty(
        xa,
        ta,
        a.clone(),
        ObjTerm::let_ty(xb, tb, b.clone(), result),
    )
}

/// Commuting conversions: push an eliminator frame into the branches of a
/// `case` or `if` sitting in its scrutinee position. The duplicated frame
/// parts are refreshed to keep binders unique.
fn try_commute(t: &ObjTerm, ctx: &mut Ctx) -> Option<ObjTerm> {
    enum Branchy {
        If(ObjTerm, ObjTerm, ObjTerm),
        Case {
            scrut: ObjTerm,
            lb: String,
            lt: Option<ObjType>,
            l: ObjTerm,
            rb: String,
            rt: Option<ObjType>,
            r: ObjTerm,
        },
    }

    fn branchy(op: &ObjTerm) -> Option<Branchy> {
        match op {
            ObjTerm::If { cond, then, els } => Some(Branchy::If(
                (**cond).clone(),
                (**then).clone(),
                (**els).clone(),
            )),
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => Some(Branchy::Case {
                scrut: (**scrut).clone(),
                lb: left_binder.clone(),
                lt: left_ty.clone(),
                l: (**left).clone(),
                rb: right_binder.clone(),
                rt: right_ty.clone(),
                r: (**right).clone(),
            }),
            _ => None,
        }
    }

    // Applies the frame around both branches, refreshing the second copy.
    fn push(ctx: &mut Ctx, b: Branchy, frame: impl Fn(ObjTerm) -> ObjTerm) -> ObjTerm {
        match b {
            Branchy::If(c, t, e) => {
                let t2 = frame(t);
                let e2 = frame(e);
                let e2 = ctx.refreshed(&e2);
                ObjTerm::if_(c, t2, e2)
            }
            Branchy::Case {
                scrut,
                lb,
                lt,
                l,
                rb,
                rt,
                r,
            } => {
                let l2 = frame(l);
                let r2 = frame(r);
                let r2 = ctx.refreshed(&r2);
                ObjTerm::Case {
                    scrut: Box::new(scrut),
                    left_binder: lb,
                    left_ty: lt,
                    left: Box::new(l2),
                    right_binder: rb,
                    right_ty: rt,
                    right: Box::new(r2),
                }
            }
        }
    }

    match t {
        ObjTerm::App(f, a) => {
            let b = branchy(f)?;
            let a = (**a).clone();
            Some(push(ctx, b, move |x| ObjTerm::app(x, a.clone())))
        }
        ObjTerm::Fst(p) => {
            let b = branchy(p)?;
            Some(push(ctx, b, ObjTerm::fst))
        }
        ObjTerm::Snd(p) => {
            let b = branchy(p)?;
            Some(push(ctx, b, ObjTerm::snd))
        }
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => {
            let b = branchy(scrut)?;
            let (lb, lt, l) = (left_binder.clone(), left_ty.clone(), (**left).clone());
            let (rb, rt, r) = (right_binder.clone(), right_ty.clone(), (**right).clone());
            Some(push(ctx, b, move |x| ObjTerm::Case {
                scrut: Box::new(x),
                left_binder: lb.clone(),
                left_ty: lt.clone(),
                left: Box::new(l.clone()),
                right_binder: rb.clone(),
                right_ty: rt.clone(),
                right: Box::new(r.clone()),
            }))
        }
        ObjTerm::If { cond, then, els } => {
            let b = branchy(cond)?;
            let (th, el) = ((**then).clone(), (**els).clone());
            Some(push(ctx, b, move |x| {
                ObjTerm::if_(x, th.clone(), el.clone())
            }))
        }
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    One,
    Two,
}

/// Bottom-up rewriting to fixpoint: children are normalized first, then root
/// rules are retried until none applies.
fn rewrite(
    t: &ObjTerm,
    phase: Phase,
    ctx: &mut Ctx,
    locals: &mut Vec<(String, ObjType)>,
) -> Result<ObjTerm> {
    let mut current = rebuild_children(t, phase, ctx, locals)?;
    loop {
        let rewritten = match phase {
            Phase::One => try_float_let(&current)
                .or_else(|| try_name_operand(&current, ctx, locals)),
            Phase::Two => try_float_let(&current)
                .or_else(|| try_beta(&current, ctx, locals))
                .or_else(|| try_commute(&current, ctx)),
        };
        match rewritten {
            Some(next) => {
                ctx.spend()?;
                current = rebuild_children(&next, phase, ctx, locals)?;
            }
            None => return Ok(current),
        }
    }
}

fn rebuild_children(
    t: &ObjTerm,
    phase: Phase,
    ctx: &mut Ctx,
    locals: &mut Vec<(String, ObjType)>,
) -> Result<ObjTerm> {
    Ok(match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
        ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
            c: *c,
            inst: inst.clone(),
            args: args
                .iter()
                .map(|a| rewrite(a, phase, ctx, locals))
                .collect::<Result<_>>()?,
        },
        ObjTerm::Lam { binder, ty, body } => {
            locals.push((binder.clone(), ty.clone().expect("unannotated lambda")));
            let body = rewrite(body, phase, ctx, locals);
            locals.pop();
            ObjTerm::Lam {
                binder: binder.clone(),
                ty: ty.clone(),
                body: Box::new(body?),
            }
        }
        ObjTerm::App(f, a) => ObjTerm::app(
            rewrite(f, phase, ctx, locals)?,
            rewrite(a, phase, ctx, locals)?,
        ),
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => {
            let rhs = rewrite(rhs, phase, ctx, locals)?;
            locals.push((binder.clone(), ty.clone().expect("unannotated let")));
            let body = rewrite(body, phase, ctx, locals);
            locals.pop();
            ObjTerm::Let {
                binder: binder.clone(),
                ty: ty.clone(),
                rhs: Box::new(rhs),
                body: Box::new(body?),
            }
        }
        ObjTerm::Pair(a, b) => ObjTerm::pair(
            rewrite(a, phase, ctx, locals)?,
            rewrite(b, phase, ctx, locals)?,
        ),
        ObjTerm::Fst(p) => ObjTerm::fst(rewrite(p, phase, ctx, locals)?),
        ObjTerm::Snd(p) => ObjTerm::snd(rewrite(p, phase, ctx, locals)?),
        ObjTerm::Inl { payload, sum } => {
            ObjTerm::inl(rewrite(payload, phase, ctx, locals)?, sum.clone())
        }
        ObjTerm::Inr { payload, sum } => {
            ObjTerm::inr(rewrite(payload, phase, ctx, locals)?, sum.clone())
        }
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => {
            let scrut = rewrite(scrut, phase, ctx, locals)?;
            locals.push((
                left_binder.clone(),
                left_ty.clone().expect("unannotated case"),
            ));
            let left = rewrite(left, phase, ctx, locals);
            locals.pop();
            locals.push((
                right_binder.clone(),
                right_ty.clone().expect("unannotated case"),
            ));
            let right = rewrite(right, phase, ctx, locals);
            locals.pop();
            ObjTerm::Case {
                scrut: Box::new(scrut),
                left_binder: left_binder.clone(),
                left_ty: left_ty.clone(),
                left: Box::new(left?),
                right_binder: right_binder.clone(),
                right_ty: right_ty.clone(),
                right: Box::new(right?),
            }
        }
        ObjTerm::If { cond, then, els } => ObjTerm::if_(
            rewrite(cond, phase, ctx, locals)?,
            rewrite(then, phase, ctx, locals)?,
            rewrite(els, phase, ctx, locals)?,
        ),
    })
}

/// Phase 1: let-insertion. Names non-value eliminator operands and floats
/// lets out of evaluation frames.
pub fn phase1(
    t: &ObjTerm,
    env: &TypeEnv,
    supply: &mut NameSupply,
    fuel: &mut u64,
) -> Result<(ObjTerm, u64)> {
    let mut ctx = Ctx {
        env,
        supply,
        fuel,
        steps: 0,
        linear: LinearMode::Everywhere,
    };
    let out = rewrite(t, Phase::One, &mut ctx, &mut Vec::new())?;
    debug_assert!(binders_unique(&out));
    Ok((out, ctx.steps))
}

/// Phase 2: beta reduction plus commuting conversions, to fixpoint.
pub fn phase2(
    t: &ObjTerm,
    env: &TypeEnv,
    supply: &mut NameSupply,
    fuel: &mut u64,
) -> Result<(ObjTerm, u64)> {
    phase2_with(t, env, supply, fuel, LinearMode::Everywhere)
}

/// Phase 2 with an explicit linear-substitution mode.
pub fn phase2_with(
    t: &ObjTerm,
    env: &TypeEnv,
    supply: &mut NameSupply,
    fuel: &mut u64,
    linear: LinearMode,
) -> Result<(ObjTerm, u64)> {
    let mut ctx = Ctx {
        env,
        supply,
        fuel,
        steps: 0,
        linear,
    };
    let out = rewrite(t, Phase::Two, &mut ctx, &mut Vec::new())?;
    debug_assert!(binders_unique(&out));
    Ok((out, ctx.steps))
}

/// Phase 3: removes `let x = M in N` whenever `x` does not occur in `N`.
pub fn phase3(t: &ObjTerm, fuel: &mut u64) -> Result<(ObjTerm, u64)> {
    fn gc(t: &ObjTerm, steps: &mut u64, fuel: &mut u64) -> Result<ObjTerm> {
        let out = match t {
            ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args
                    .iter()
                    .map(|a| gc(a, steps, fuel))
                    .collect::<Result<_>>()?,
            },
            ObjTerm::Lam { binder, ty, body } => ObjTerm::Lam {
                binder: binder.clone(),
                ty: ty.clone(),
                body: Box::new(gc(body, steps, fuel)?),
            },
            ObjTerm::App(f, a) => ObjTerm::app(gc(f, steps, fuel)?, gc(a, steps, fuel)?),
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let body = gc(body, steps, fuel)?;
                if count_free(&body, binder) == 0 {
                    if *fuel == 0 {
                        return Err(Diagnostic::new(
                            codes::NORM_FUEL,
                            "normalization step budget exhausted",
                        ));
                    }
                    *fuel -= 1;
                    *steps += 1;
                    body
                } else {
                    ObjTerm::Let {
                        binder: binder.clone(),
                        ty: ty.clone(),
                        rhs: Box::new(gc(rhs, steps, fuel)?),
                        body: Box::new(body),
                    }
                }
            }
            ObjTerm::Pair(a, b) => {
                ObjTerm::pair(gc(a, steps, fuel)?, gc(b, steps, fuel)?)
            }
            ObjTerm::Fst(p) => ObjTerm::fst(gc(p, steps, fuel)?),
            ObjTerm::Snd(p) => ObjTerm::snd(gc(p, steps, fuel)?),
            ObjTerm::Inl { payload, sum } => {
                ObjTerm::inl(gc(payload, steps, fuel)?, sum.clone())
            }
            ObjTerm::Inr { payload, sum } => {
                ObjTerm::inr(gc(payload, steps, fuel)?, sum.clone())
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => ObjTerm::Case {
                scrut: Box::new(gc(scrut, steps, fuel)?),
                left_binder: left_binder.clone(),
                left_ty: left_ty.clone(),
                left: Box::new(gc(left, steps, fuel)?),
                right_binder: right_binder.clone(),
                right_ty: right_ty.clone(),
                right: Box::new(gc(right, steps, fuel)?),
            },
            ObjTerm::If { cond, then, els } => ObjTerm::if_(
                gc(cond, steps, fuel)?,
                gc(then, steps, fuel)?,
                gc(els, steps, fuel)?,
            ),
        };
        Ok(out)
    }

    let mut steps = 0;
    let mut current = t.clone();
    loop {
        let next = gc(&current, &mut steps, fuel)?;
        if next == current {
            return Ok((current, steps));
        }
        current = next;
    }
}

/// Runs the phases in order. Call-by-need interleaves phases 2 and 3 to a
/// joint fixpoint, since removing a dead binding can make another binding
/// linear; call-by-value stops after phase 2.
pub fn normalize(
    t: &ObjTerm,
    env: &TypeEnv,
    strategy: Strategy,
    fuel_limit: u64,
    supply: &mut NameSupply,
) -> Result<(ObjTerm, NormStats)> {
    let mut fuel = fuel_limit;
    let mut stats = NormStats {
        fuel_limit,
        ..NormStats::default()
    };
    let (mut current, s1) = phase1(t, env, supply, &mut fuel)?;
    stats.phase1_steps = s1;
    loop {
        let (next, s2) = phase2(&current, env, supply, &mut fuel)?;
        stats.phase2_steps += s2;
        current = next;
        if strategy == Strategy::Value {
            break;
        }
        let (next, s3) = phase3(&current, &mut fuel)?;
        stats.phase3_steps += s3;
        current = next;
        if s3 == 0 {
            break;
        }
    }
    stats.result_size = current.size();
    debug_assert!(binders_unique(&current));
    Ok((current, stats))
}

/// Scans for any remaining phase-2 redex; normal forms must have none.
pub fn find_phase2_redex(t: &ObjTerm, env: &TypeEnv, supply: &mut NameSupply) -> Option<String> {
    let mut fuel = u64::MAX;
    let mut ctx = Ctx {
        env,
        supply,
        fuel: &mut fuel,
        steps: 0,
        linear: LinearMode::Everywhere,
    };
    let mut found = None;
    fn scan(
        t: &ObjTerm,
        ctx: &mut Ctx,
        locals: &mut Vec<(String, ObjType)>,
        found: &mut Option<String>,
    ) {
        if found.is_some() {
            return;
        }
        if try_float_let(t).is_some() {
            *found = Some(format!("let-float redex at {}", crate::pretty::pretty_term(t)));
            return;
        }
        if try_beta(t, ctx, locals).is_some() {
            *found = Some(format!("beta redex at {}", crate::pretty::pretty_term(t)));
            return;
        }
        if try_commute(t, ctx).is_some() {
            *found = Some(format!("commuting redex at {}", crate::pretty::pretty_term(t)));
            return;
        }
        match t {
            ObjTerm::Lam { binder, ty, body } => {
                locals.push((binder.clone(), ty.clone().unwrap()));
                scan(body, ctx, locals, found);
                locals.pop();
            }
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                scan(rhs, ctx, locals, found);
                locals.push((binder.clone(), ty.clone().unwrap()));
                scan(body, ctx, locals, found);
                locals.pop();
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => {
                scan(scrut, ctx, locals, found);
                locals.push((left_binder.clone(), left_ty.clone().unwrap()));
                scan(left, ctx, locals, found);
                locals.pop();
                locals.push((right_binder.clone(), right_ty.clone().unwrap()));
                scan(right, ctx, locals, found);
                locals.pop();
            }
            ObjTerm::App(f, a) => {
                scan(f, ctx, locals, found);
                scan(a, ctx, locals, found);
            }
            ObjTerm::ConstApp { args, .. } => {
                for a in args {
                    scan(a, ctx, locals, found);
                }
            }
            ObjTerm::Pair(a, b) => {
                scan(a, ctx, locals, found);
                scan(b, ctx, locals, found);
            }
            ObjTerm::Fst(p) | ObjTerm::Snd(p) => scan(p, ctx, locals, found),
            ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => {
                scan(payload, ctx, locals, found)
            }
            ObjTerm::If { cond, then, els } => {
                scan(cond, ctx, locals, found);
                scan(then, ctx, locals, found);
                scan(els, ctx, locals, found);
            }
            ObjTerm::Var(_) | ObjTerm::Lit(_) => {}
        }
    }
    scan(t, &mut ctx, &mut Vec::new(), &mut found);
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;
    use crate::pipeline::{front, typed_term_from_text, Options};
    use crate::pretty::pretty_term;

    const POWER_SRC: &str = "\
power = \\n ->
  if n < 0 then
    [|| \\x -> if x == 0 then 0 else 1 / ($$(power (-n)) x) ||]
  else if n == 0 then
    [|| \\x -> 1 ||]
  else if even n then
    [|| \\x -> let y = $$(power (div n 2)) x in y * y ||]
  else
    [|| \\x -> x * ($$(power (n - 1)) x) ||]

main :: Float -> Float
main = power (-6)
";

    // Golden normal form for power (-6).
    const POWER_NF: &str =
        "\\u -> if u == 0.0 then 0.0 else let v = u * 1.0 in let w = u * (v * v) in 1.0 / (w * w)";

    fn normalize_source(src: &str) -> (ObjTerm, NormStats, crate::typecheck::TypedTerm) {
        let mut p = front(src, Options::default()).unwrap();
        let (typed, stats) = p.normalize().unwrap();
        (typed.term.clone(), stats, typed)
    }

    #[test]
    fn power_normalizes_to_golden_form() {
        let (nf, stats, _) = normalize_source(POWER_SRC);
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let expected = typed_term_from_text(POWER_NF, Some(&ff)).unwrap();
        assert!(
            alpha_eq(&nf, &expected.term),
            "got:\n  {}\nwant:\n  {}",
            pretty_term(&nf),
            pretty_term(&expected.term)
        );
        assert!(stats.total_steps() > 0);
        assert!(stats.total_steps() < DEFAULT_NORM_FUEL);
    }

    #[test]
    fn power_phase2_output_already_matches() {
        // The golden form is reached by phase 2 alone; phase 3 finds
        // nothing to collect for this program.
        let mut p = front(POWER_SRC, Options::default()).unwrap();
        let mut fuel = DEFAULT_NORM_FUEL;
        let (t1, _) = phase1(&p.typed.term, &p.typed.env, &mut p.supply, &mut fuel).unwrap();
        let (t2, _) = phase2(&t1, &p.typed.env, &mut p.supply, &mut fuel).unwrap();
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let expected = typed_term_from_text(POWER_NF, Some(&ff)).unwrap();
        assert!(
            alpha_eq(&t2, &expected.term),
            "phase-2 output:\n  {}",
            pretty_term(&t2)
        );
        let (t3, steps3) = phase3(&t2, &mut fuel).unwrap();
        assert_eq!(steps3, 0);
        assert!(alpha_eq(&t3, &t2));
    }

    #[test]
    fn normalization_is_idempotent_on_power() {
        let (nf, _, typed) = normalize_source(POWER_SRC);
        let mut supply = NameSupply::new();
        let (again, stats) =
            normalize(&nf, &typed.env, Strategy::Need, DEFAULT_NORM_FUEL, &mut supply).unwrap();
        assert!(alpha_eq(&nf, &again), "second pass changed the term");
        let _ = stats;
    }

    #[test]
    fn no_phase2_redex_remains() {
        let (nf, _, typed) = normalize_source(POWER_SRC);
        let mut supply = NameSupply::new();
        assert_eq!(find_phase2_redex(&nf, &typed.env, &mut supply), None);
    }

    #[test]
    fn phase1_names_eliminator_operand() {
        // App argument that is a constant application gets let-bound.
        let src = "main :: Float -> Float\nmain = [|| \\f0 -> (\\z -> z) (f0 + 1.0) ||]\n";
        let mut p = front(src, Options::default()).unwrap();
        let mut fuel = DEFAULT_NORM_FUEL;
        let (t1, steps) =
            phase1(&p.typed.term, &p.typed.env, &mut p.supply, &mut fuel).unwrap();
        assert!(steps >= 1);
        // Shape: \f0 -> let t = f0 + 1.0 in (\z -> z) t
        match &t1 {
            ObjTerm::Lam { body, .. } => match &**body {
                ObjTerm::Let { rhs, body, .. } => {
                    assert!(matches!(**rhs, ObjTerm::ConstApp { .. }));
                    assert!(matches!(**body, ObjTerm::App(_, _)));
                }
                other => panic!("phase 1 did not name the operand: {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn let_reassociation() {
        // let y = (let x = 1 + 2 in x * x) in y + y  floats the inner let out.
        let src =
            "main :: Int\nmain = [|| let y = (let x = 1 + 2 in x * x) in y + y ||]\n";
        let mut p = front(src, Options::default()).unwrap();
        let mut fuel = DEFAULT_NORM_FUEL;
        let (t1, _) = phase1(&p.typed.term, &p.typed.env, &mut p.supply, &mut fuel).unwrap();
        match &t1 {
            ObjTerm::Let { rhs, body, .. } => {
                assert!(
                    !matches!(**rhs, ObjTerm::Let { .. }),
                    "inner let not floated: {}",
                    pretty_term(&t1)
                );
                assert!(matches!(**body, ObjTerm::Let { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fst_of_branching_pair_commutes() {
        let src = "main :: Bool -> Int\nmain = [|| \\c -> fst (if c then (1, 2) else (3, 4)) ||]\n";
        let (nf, _, _) = normalize_source(src);
        let expected = typed_term_from_text(
            "\\c -> if c then 1 else 3",
            Some(&ObjType::fun(ObjType::BOOL, ObjType::INT)),
        )
        .unwrap();
        assert!(alpha_eq(&nf, &expected.term), "got {}", pretty_term(&nf));
    }

    #[test]
    fn dead_let_strategy_split() {
        let src = "main :: Float -> Float\nmain = [|| \\x -> let d = sqrt 2.0 in x * 1.0 ||]\n";
        let mut opts = Options::default();
        opts.strategy = Strategy::Value;
        let mut p = front(src, opts).unwrap();
        let (value_nf, _) = p.normalize().unwrap();
        // Call-by-value retains the dead binding.
        let mut lets = 0;
        value_nf.term.walk(&mut |s| {
            if matches!(s, ObjTerm::Let { .. }) {
                lets += 1;
            }
        });
        assert_eq!(lets, 1, "got {}", pretty_term(&value_nf.term));

        let (need_nf, _, _) = normalize_source(src);
        let mut lets = 0;
        need_nf.walk(&mut |s| {
            if matches!(s, ObjTerm::Let { .. }) {
                lets += 1;
            }
        });
        assert_eq!(lets, 0, "got {}", pretty_term(&need_nf));
    }

    #[test]
    fn save_is_never_unfolded() {
        let src = "main :: Float -> Float\nmain = [|| \\x -> save (x * 1.0) ||]\n";
        let (nf, _, _) = normalize_source(src);
        let mut saves = 0;
        nf.walk(&mut |s| {
            if matches!(s, ObjTerm::ConstApp { c: crate::consts::Const::Save, .. }) {
                saves += 1;
            }
        });
        assert_eq!(saves, 1);
    }

    #[test]
    fn preprocess_saturates_bare_operator() {
        let mut supply = NameSupply::new();
        // (*) passed bare.
        let t = ObjTerm::var("*");
        let out = preprocess(&t, &mut supply);
        match &out {
            ObjTerm::Lam { binder: a, body, .. } => match &**body {
                ObjTerm::Lam { binder: b, body, .. } => match &**body {
                    ObjTerm::ConstApp { c, args, .. } => {
                        assert_eq!(*c, crate::consts::Const::Mul);
                        assert_eq!(args[0], ObjTerm::var(a.clone()));
                        assert_eq!(args[1], ObjTerm::var(b.clone()));
                    }
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn preprocess_leaves_saturated_and_splits_overapplied() {
        let mut supply = NameSupply::new();
        // save L M  ~>  (save L) M
        let t = ObjTerm::app(
            ObjTerm::app(ObjTerm::var("save"), ObjTerm::var("l")),
            ObjTerm::var("m"),
        );
        let out = preprocess(&t, &mut supply);
        match &out {
            ObjTerm::App(f, a) => {
                assert!(matches!(
                    **f,
                    ObjTerm::ConstApp { c: crate::consts::Const::Save, .. }
                ));
                assert_eq!(**a, ObjTerm::var("m"));
            }
            other => panic!("unexpected {other:?}"),
        }
        // Fully applied stays unchanged.
        let t = ObjTerm::const_app(
            crate::consts::Const::Add,
            vec![ObjTerm::var("x"), ObjTerm::int(1)],
        );
        assert_eq!(preprocess(&t, &mut supply), t);
        // A binder shadows the constant name.
        let t = ObjTerm::lam("save", ObjTerm::var("save"));
        assert_eq!(preprocess(&t, &mut supply), t);
    }
}
