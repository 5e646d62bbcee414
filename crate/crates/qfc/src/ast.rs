//! Object-language types and terms.
//!
//! Terms use named binders with a per-pipeline fresh-name supply; comparison
//! is up to renaming of bound variables ([`alpha_eq`]). Constant applications
//! are always saturated. `Inl`/`Inr` carry their full sum type and binders
//! carry their type once reconstruction has run, so every subterm of a typed
//! term has a syntactically computable type ([`type_of`]).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::consts::Const;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Bool,
    Int,
    Float,
    Unit,
}

/// Object-language types: base types, functions, products, sums, and
/// manifest arrays. Finite trees, no recursion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjType {
    Base(Base),
    Fun(Box<ObjType>, Box<ObjType>),
    Prod(Box<ObjType>, Box<ObjType>),
    Sum(Box<ObjType>, Box<ObjType>),
    Array(Box<ObjType>),
}

impl ObjType {
    pub const BOOL: ObjType = ObjType::Base(Base::Bool);
    pub const INT: ObjType = ObjType::Base(Base::Int);
    pub const FLOAT: ObjType = ObjType::Base(Base::Float);
    pub const UNIT: ObjType = ObjType::Base(Base::Unit);

    pub fn fun(dom: ObjType, cod: ObjType) -> ObjType {
        ObjType::Fun(Box::new(dom), Box::new(cod))
    }
    pub fn prod(l: ObjType, r: ObjType) -> ObjType {
        ObjType::Prod(Box::new(l), Box::new(r))
    }
    pub fn sum(l: ObjType, r: ObjType) -> ObjType {
        ObjType::Sum(Box::new(l), Box::new(r))
    }
    pub fn array(elem: ObjType) -> ObjType {
        ObjType::Array(Box::new(elem))
    }

    /// Splits `A1 -> ... -> An -> B` into (args, result).
    pub fn uncurry(&self) -> (Vec<&ObjType>, &ObjType) {
        let mut args = Vec::new();
        let mut t = self;
        while let ObjType::Fun(d, c) = t {
            args.push(d.as_ref());
            t = c;
        }
        (args, t)
    }
}

/// Representable types are those admitted as data in generated C: base
/// types, products of representables, and arrays of representables.
/// Functions and sums are not representable.
pub fn is_representable(ty: &ObjType) -> bool {
    match ty {
        ObjType::Base(_) => true,
        ObjType::Fun(_, _) | ObjType::Sum(_, _) => false,
        ObjType::Prod(l, r) => is_representable(l) && is_representable(r),
        ObjType::Array(e) => is_representable(e),
    }
}

/// The subformulas of a type: the type itself and the subformulas of its
/// parts. Base types have no parts.
pub fn subformulas(ty: &ObjType) -> BTreeSet<ObjType> {
    let mut out = BTreeSet::new();
    collect_subformulas(ty, &mut out);
    out
}

fn collect_subformulas(ty: &ObjType, out: &mut BTreeSet<ObjType>) {
    if !out.insert(ty.clone()) {
        return;
    }
    match ty {
        ObjType::Base(_) => {}
        ObjType::Fun(a, b) | ObjType::Prod(a, b) | ObjType::Sum(a, b) => {
            collect_subformulas(a, out);
            collect_subformulas(b, out);
        }
        ObjType::Array(e) => collect_subformulas(e, out),
    }
}

/// All subformulas except the type itself.
pub fn proper_subformulas(ty: &ObjType) -> BTreeSet<ObjType> {
    let mut s = subformulas(ty);
    s.remove(ty);
    s
}

/// Rank of a type with respect to representability: representable types have
/// rank 0, functions raise the rank of their domain, and non-representable
/// products and sums take the maximum of their components.
pub fn rank(ty: &ObjType) -> u32 {
    if is_representable(ty) {
        return 0;
    }
    match ty {
        ObjType::Fun(a, b) => (rank(a) + 1).max(rank(b)),
        ObjType::Prod(a, b) | ObjType::Sum(a, b) => rank(a).max(rank(b)),
        ObjType::Array(e) => rank(e),
        ObjType::Base(_) => 0,
    }
}

/// Literals. Which numeric kind a surface literal denotes is settled during
/// type reconstruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lit {
    Bool(bool),
    Int(i32),
    Float(f64),
    Unit,
}

impl Lit {
    pub fn base(&self) -> Base {
        match self {
            Lit::Bool(_) => Base::Bool,
            Lit::Int(_) => Base::Int,
            Lit::Float(_) => Base::Float,
            Lit::Unit => Base::Unit,
        }
    }
}

pub type Name = String;

/// Object-language terms. `ConstApp` is saturated by construction of the
/// pipeline: the preprocessor eta-expands under-applied constants before
/// type reconstruction runs.
#[derive(Clone, Debug, PartialEq)]
pub enum ObjTerm {
    Var(Name),
    Lit(Lit),
    ConstApp {
        c: Const,
        /// Monomorphic placeholder instantiation; filled by type reconstruction.
        inst: Option<ObjType>,
        args: Vec<ObjTerm>,
    },
    Lam {
        binder: Name,
        /// Binder type; filled by type reconstruction.
        ty: Option<ObjType>,
        body: Box<ObjTerm>,
    },
    App(Box<ObjTerm>, Box<ObjTerm>),
    Let {
        binder: Name,
        ty: Option<ObjType>,
        rhs: Box<ObjTerm>,
        body: Box<ObjTerm>,
    },
    Pair(Box<ObjTerm>, Box<ObjTerm>),
    Fst(Box<ObjTerm>),
    Snd(Box<ObjTerm>),
    Inl {
        payload: Box<ObjTerm>,
        /// The full sum type, so injections have a unique type.
        sum: Option<ObjType>,
    },
    Inr {
        payload: Box<ObjTerm>,
        sum: Option<ObjType>,
    },
    Case {
        scrut: Box<ObjTerm>,
        left_binder: Name,
        left_ty: Option<ObjType>,
        left: Box<ObjTerm>,
        right_binder: Name,
        right_ty: Option<ObjType>,
        right: Box<ObjTerm>,
    },
    If {
        cond: Box<ObjTerm>,
        then: Box<ObjTerm>,
        els: Box<ObjTerm>,
    },
}

impl ObjTerm {
    pub fn var(n: impl Into<Name>) -> ObjTerm {
        ObjTerm::Var(n.into())
    }
    pub fn int(v: i32) -> ObjTerm {
        ObjTerm::Lit(Lit::Int(v))
    }
    pub fn float(v: f64) -> ObjTerm {
        ObjTerm::Lit(Lit::Float(v))
    }
    pub fn bool(v: bool) -> ObjTerm {
        ObjTerm::Lit(Lit::Bool(v))
    }
    pub fn unit() -> ObjTerm {
        ObjTerm::Lit(Lit::Unit)
    }
    pub fn lam(binder: impl Into<Name>, body: ObjTerm) -> ObjTerm {
        ObjTerm::Lam {
            binder: binder.into(),
            ty: None,
            body: Box::new(body),
        }
    }
    pub fn lam_ty(binder: impl Into<Name>, ty: ObjType, body: ObjTerm) -> ObjTerm {
        ObjTerm::Lam {
            binder: binder.into(),
            ty: Some(ty),
            body: Box::new(body),
        }
    }
    pub fn app(f: ObjTerm, a: ObjTerm) -> ObjTerm {
        ObjTerm::App(Box::new(f), Box::new(a))
    }
    pub fn let_(binder: impl Into<Name>, rhs: ObjTerm, body: ObjTerm) -> ObjTerm {
        ObjTerm::Let {
            binder: binder.into(),
            ty: None,
            rhs: Box::new(rhs),
            body: Box::new(body),
        }
    }
    pub fn let_ty(binder: impl Into<Name>, ty: ObjType, rhs: ObjTerm, body: ObjTerm) -> ObjTerm {
        ObjTerm::Let {
            binder: binder.into(),
            ty: Some(ty),
            rhs: Box::new(rhs),
            body: Box::new(body),
        }
    }
    pub fn pair(a: ObjTerm, b: ObjTerm) -> ObjTerm {
        ObjTerm::Pair(Box::new(a), Box::new(b))
    }
    pub fn fst(t: ObjTerm) -> ObjTerm {
        ObjTerm::Fst(Box::new(t))
    }
    pub fn snd(t: ObjTerm) -> ObjTerm {
        ObjTerm::Snd(Box::new(t))
    }
    pub fn inl(payload: ObjTerm, sum: Option<ObjType>) -> ObjTerm {
        ObjTerm::Inl {
            payload: Box::new(payload),
            sum,
        }
    }
    pub fn inr(payload: ObjTerm, sum: Option<ObjType>) -> ObjTerm {
        ObjTerm::Inr {
            payload: Box::new(payload),
            sum,
        }
    }
    pub fn if_(cond: ObjTerm, then: ObjTerm, els: ObjTerm) -> ObjTerm {
        ObjTerm::If {
            cond: Box::new(cond),
            then: Box::new(then),
            els: Box::new(els),
        }
    }
    pub fn const_app(c: Const, args: Vec<ObjTerm>) -> ObjTerm {
        debug_assert_eq!(args.len(), c.arity());
        ObjTerm::ConstApp {
            c,
            inst: None,
            args,
        }
    }

    /// Node count, used by normalization statistics.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal over all subterms, including `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ObjTerm)) {
        f(self);
        match self {
            ObjTerm::Var(_) | ObjTerm::Lit(_) => {}
            ObjTerm::ConstApp { args, .. } => {
                for a in args {
                    a.walk(f);
                }
            }
            ObjTerm::Lam { body, .. } => body.walk(f),
            ObjTerm::App(l, r) | ObjTerm::Pair(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ObjTerm::Let { rhs, body, .. } => {
                rhs.walk(f);
                body.walk(f);
            }
            ObjTerm::Fst(t) | ObjTerm::Snd(t) => t.walk(f),
            ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => payload.walk(f),
            ObjTerm::Case {
                scrut, left, right, ..
            } => {
                scrut.walk(f);
                left.walk(f);
                right.walk(f);
            }
            ObjTerm::If { cond, then, els } => {
                cond.walk(f);
                then.walk(f);
                els.walk(f);
            }
        }
    }
}

/// Values: variables, literals, lambdas, and pairs/injections of values.
/// Constant applications are never values.
pub fn is_value(t: &ObjTerm) -> bool {
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) | ObjTerm::Lam { .. } => true,
        ObjTerm::Pair(a, b) => is_value(a) && is_value(b),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => is_value(payload),
        _ => false,
    }
}

/// The set of free variables. Literals and constant names are not variables.
pub fn free_vars(t: &ObjTerm) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    free_vars_into(t, &mut Vec::new(), &mut out);
    out
}

fn free_vars_into(t: &ObjTerm, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        ObjTerm::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        ObjTerm::Lit(_) => {}
        ObjTerm::ConstApp { args, .. } => {
            for a in args {
                free_vars_into(a, bound, out);
            }
        }
        ObjTerm::Lam { binder, body, .. } => {
            bound.push(binder.clone());
            free_vars_into(body, bound, out);
            bound.pop();
        }
        ObjTerm::App(l, r) | ObjTerm::Pair(l, r) => {
            free_vars_into(l, bound, out);
            free_vars_into(r, bound, out);
        }
        ObjTerm::Let {
            binder, rhs, body, ..
        } => {
            free_vars_into(rhs, bound, out);
            bound.push(binder.clone());
            free_vars_into(body, bound, out);
            bound.pop();
        }
        ObjTerm::Fst(t) | ObjTerm::Snd(t) => free_vars_into(t, bound, out),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => {
            free_vars_into(payload, bound, out)
        }
        ObjTerm::Case {
            scrut,
            left_binder,
            left,
            right_binder,
            right,
            ..
        } => {
            free_vars_into(scrut, bound, out);
            bound.push(left_binder.clone());
            free_vars_into(left, bound, out);
            bound.pop();
            bound.push(right_binder.clone());
            free_vars_into(right, bound, out);
            bound.pop();
        }
        ObjTerm::If { cond, then, els } => {
            free_vars_into(cond, bound, out);
            free_vars_into(then, bound, out);
            free_vars_into(els, bound, out);
        }
    }
}

/// Number of free occurrences of `x` in `t`.
pub fn count_free(t: &ObjTerm, x: &str) -> usize {
    match t {
        ObjTerm::Var(y) => usize::from(y == x),
        ObjTerm::Lit(_) => 0,
        ObjTerm::ConstApp { args, .. } => args.iter().map(|a| count_free(a, x)).sum(),
        ObjTerm::Lam { binder, body, .. } => {
            if binder == x {
                0
            } else {
                count_free(body, x)
            }
        }
        ObjTerm::App(l, r) | ObjTerm::Pair(l, r) => count_free(l, x) + count_free(r, x),
        ObjTerm::Let {
            binder, rhs, body, ..
        } => {
            count_free(rhs, x)
                + if binder == x {
                    0
                } else {
                    count_free(body, x)
                }
        }
        ObjTerm::Fst(t) | ObjTerm::Snd(t) => count_free(t, x),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => count_free(payload, x),
        ObjTerm::Case {
            scrut,
            left_binder,
            left,
            right_binder,
            right,
            ..
        } => {
            count_free(scrut, x)
                + if left_binder == x {
                    0
                } else {
                    count_free(left, x)
                }
                + if right_binder == x {
                    0
                } else {
                    count_free(right, x)
                }
        }
        ObjTerm::If { cond, then, els } => {
            count_free(cond, x) + count_free(then, x) + count_free(els, x)
        }
    }
}

/// Capture-avoiding substitution of `v` for `x` in `t`. Binders shadowed by
/// `x` stop the substitution; binders that would capture a free variable of
/// `v` are renamed first.
pub fn subst(t: &ObjTerm, x: &str, v: &ObjTerm) -> ObjTerm {
    let fv = free_vars(v);
    subst_in(t, x, v, &fv)
}

fn subst_in(t: &ObjTerm, x: &str, v: &ObjTerm, fv_v: &BTreeSet<Name>) -> ObjTerm {
    match t {
        ObjTerm::Var(y) => {
            if y == x {
                v.clone()
            } else {
                t.clone()
            }
        }
        ObjTerm::Lit(_) => t.clone(),
        ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
            c: *c,
            inst: inst.clone(),
            args: args.iter().map(|a| subst_in(a, x, v, fv_v)).collect(),
        },
        ObjTerm::Lam { binder, ty, body } => {
            if binder == x {
                t.clone()
            } else if fv_v.contains(binder) && count_free(body, x) > 0 {
                let fresh = avoid_capture(binder, body, fv_v);
                let body = subst(body, binder, &ObjTerm::Var(fresh.clone()));
                ObjTerm::Lam {
                    binder: fresh,
                    ty: ty.clone(),
                    body: Box::new(subst_in(&body, x, v, fv_v)),
                }
            } else {
                ObjTerm::Lam {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    body: Box::new(subst_in(body, x, v, fv_v)),
                }
            }
        }
        ObjTerm::App(l, r) => ObjTerm::app(subst_in(l, x, v, fv_v), subst_in(r, x, v, fv_v)),
        ObjTerm::Pair(l, r) => ObjTerm::pair(subst_in(l, x, v, fv_v), subst_in(r, x, v, fv_v)),
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => {
            let rhs2 = subst_in(rhs, x, v, fv_v);
            if binder == x {
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new(rhs2),
                    body: body.clone(),
                }
            } else if fv_v.contains(binder) && count_free(body, x) > 0 {
                let fresh = avoid_capture(binder, body, fv_v);
                let body = subst(body, binder, &ObjTerm::Var(fresh.clone()));
                ObjTerm::Let {
                    binder: fresh,
                    ty: ty.clone(),
                    rhs: Box::new(rhs2),
                    body: Box::new(subst_in(&body, x, v, fv_v)),
                }
            } else {
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new(rhs2),
                    body: Box::new(subst_in(body, x, v, fv_v)),
                }
            }
        }
        ObjTerm::Fst(t1) => ObjTerm::fst(subst_in(t1, x, v, fv_v)),
        ObjTerm::Snd(t1) => ObjTerm::snd(subst_in(t1, x, v, fv_v)),
        ObjTerm::Inl { payload, sum } => ObjTerm::inl(subst_in(payload, x, v, fv_v), sum.clone()),
        ObjTerm::Inr { payload, sum } => ObjTerm::inr(subst_in(payload, x, v, fv_v), sum.clone()),
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => {
            let scrut = Box::new(subst_in(scrut, x, v, fv_v));
            let (left_binder, left) = subst_branch(left_binder, left, x, v, fv_v);
            let (right_binder, right) = subst_branch(right_binder, right, x, v, fv_v);
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty: left_ty.clone(),
                left: Box::new(left),
                right_binder,
                right_ty: right_ty.clone(),
                right: Box::new(right),
            }
        }
        ObjTerm::If { cond, then, els } => ObjTerm::if_(
            subst_in(cond, x, v, fv_v),
            subst_in(then, x, v, fv_v),
            subst_in(els, x, v, fv_v),
        ),
    }
}

fn subst_branch(
    binder: &Name,
    body: &ObjTerm,
    x: &str,
    v: &ObjTerm,
    fv_v: &BTreeSet<Name>,
) -> (Name, ObjTerm) {
    if binder == x {
        (binder.clone(), body.clone())
    } else if fv_v.contains(binder) && count_free(body, x) > 0 {
        let fresh = avoid_capture(binder, body, fv_v);
        let body = subst(body, binder, &ObjTerm::Var(fresh.clone()));
        (fresh.clone(), subst_in(&body, x, v, fv_v))
    } else {
        (binder.clone(), subst_in(body, x, v, fv_v))
    }
}

fn avoid_capture(binder: &str, body: &ObjTerm, fv_v: &BTreeSet<Name>) -> Name {
    let used = free_vars(body);
    let mut i = 0;
    loop {
        let candidate = format!("{binder}_{i}");
        if !fv_v.contains(&candidate) && !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Structural equality modulo consistent renaming of bound variables.
/// Type annotations are compared when present on both sides.
pub fn alpha_eq(a: &ObjTerm, b: &ObjTerm) -> bool {
    alpha_eq_in(a, b, &mut Vec::new())
}

fn ann_eq(a: &Option<ObjType>, b: &Option<ObjType>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

fn alpha_eq_in(a: &ObjTerm, b: &ObjTerm, pairs: &mut Vec<(Name, Name)>) -> bool {
    use ObjTerm::*;
    match (a, b) {
        (Var(x), Var(y)) => {
            for (bx, by) in pairs.iter().rev() {
                let hit_x = bx == x;
                let hit_y = by == y;
                if hit_x || hit_y {
                    return hit_x && hit_y;
                }
            }
            x == y
        }
        (Lit(l1), Lit(l2)) => l1 == l2,
        (
            ConstApp {
                c: c1,
                inst: i1,
                args: a1,
            },
            ConstApp {
                c: c2,
                inst: i2,
                args: a2,
            },
        ) => {
            c1 == c2
                && ann_eq(i1, i2)
                && a1.len() == a2.len()
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(x, y)| alpha_eq_in(x, y, pairs))
        }
        (
            Lam {
                binder: x,
                ty: t1,
                body: b1,
            },
            Lam {
                binder: y,
                ty: t2,
                body: b2,
            },
        ) => {
            if !ann_eq(t1, t2) {
                return false;
            }
            pairs.push((x.clone(), y.clone()));
            let r = alpha_eq_in(b1, b2, pairs);
            pairs.pop();
            r
        }
        (App(f1, a1), App(f2, a2)) => {
            alpha_eq_in(f1, f2, pairs) && alpha_eq_in(a1, a2, pairs)
        }
        (Pair(l1, r1), Pair(l2, r2)) => {
            alpha_eq_in(l1, l2, pairs) && alpha_eq_in(r1, r2, pairs)
        }
        (
            Let {
                binder: x,
                ty: t1,
                rhs: r1,
                body: b1,
            },
            Let {
                binder: y,
                ty: t2,
                rhs: r2,
                body: b2,
            },
        ) => {
            if !ann_eq(t1, t2) || !alpha_eq_in(r1, r2, pairs) {
                return false;
            }
            pairs.push((x.clone(), y.clone()));
            let r = alpha_eq_in(b1, b2, pairs);
            pairs.pop();
            r
        }
        (Fst(t1), Fst(t2)) | (Snd(t1), Snd(t2)) => alpha_eq_in(t1, t2, pairs),
        (
            Inl {
                payload: p1,
                sum: s1,
            },
            Inl {
                payload: p2,
                sum: s2,
            },
        )
        | (
            Inr {
                payload: p1,
                sum: s1,
            },
            Inr {
                payload: p2,
                sum: s2,
            },
        ) => ann_eq(s1, s2) && alpha_eq_in(p1, p2, pairs),
        (
            Case {
                scrut: s1,
                left_binder: lx,
                left: l1,
                right_binder: rx,
                right: r1,
                ..
            },
            Case {
                scrut: s2,
                left_binder: ly,
                left: l2,
                right_binder: ry,
                right: r2,
                ..
            },
        ) => {
            if !alpha_eq_in(s1, s2, pairs) {
                return false;
            }
            pairs.push((lx.clone(), ly.clone()));
            let l_ok = alpha_eq_in(l1, l2, pairs);
            pairs.pop();
            if !l_ok {
                return false;
            }
            pairs.push((rx.clone(), ry.clone()));
            let r_ok = alpha_eq_in(r1, r2, pairs);
            pairs.pop();
            r_ok
        }
        (
            If {
                cond: c1,
                then: t1,
                els: e1,
            },
            If {
                cond: c2,
                then: t2,
                els: e2,
            },
        ) => {
            alpha_eq_in(c1, c2, pairs)
                && alpha_eq_in(t1, t2, pairs)
                && alpha_eq_in(e1, e2, pairs)
        }
        _ => false,
    }
}

/// Ordered environment of free variables.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: BTreeMap<Name, ObjType>,
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }
    pub fn insert(&mut self, name: impl Into<Name>, ty: ObjType) {
        self.entries.insert(name.into(), ty);
    }
    pub fn lookup(&self, name: &str) -> Option<&ObjType> {
        self.entries.get(name)
    }
    pub fn iter(&self) -> impl Iterator<Item = (&Name, &ObjType)> {
        self.entries.iter()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Monotone fresh-name supply. One per pipeline run; names are
/// counter-suffixed so they cannot collide with source identifiers, which
/// never contain `%`.
#[derive(Debug, Default)]
pub struct NameSupply {
    next: u64,
}

impl NameSupply {
    pub fn new() -> NameSupply {
        NameSupply::default()
    }

    pub fn fresh(&mut self, hint: &str) -> Name {
        let n = self.next;
        self.next += 1;
        let hint = hint.trim_end_matches(|c: char| c.is_ascii_digit() || c == '%');
        let hint = if hint.is_empty() { "v" } else { hint };
        format!("{hint}%{n}")
    }
}

/// Renames every binder to a fresh name so binders are globally unique.
pub fn uniquify(t: &ObjTerm, supply: &mut NameSupply) -> ObjTerm {
    fn go(t: &ObjTerm, env: &mut Vec<(Name, Name)>, supply: &mut NameSupply) -> ObjTerm {
        match t {
            ObjTerm::Var(x) => {
                for (old, new) in env.iter().rev() {
                    if old == x {
                        return ObjTerm::Var(new.clone());
                    }
                }
                t.clone()
            }
            ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args.iter().map(|a| go(a, env, supply)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                let fresh = supply.fresh(binder);
                env.push((binder.clone(), fresh.clone()));
                let body = go(body, env, supply);
                env.pop();
                ObjTerm::Lam {
                    binder: fresh,
                    ty: ty.clone(),
                    body: Box::new(body),
                }
            }
            ObjTerm::App(f, a) => ObjTerm::app(go(f, env, supply), go(a, env, supply)),
            ObjTerm::Pair(a, b) => ObjTerm::pair(go(a, env, supply), go(b, env, supply)),
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let rhs = go(rhs, env, supply);
                let fresh = supply.fresh(binder);
                env.push((binder.clone(), fresh.clone()));
                let body = go(body, env, supply);
                env.pop();
                ObjTerm::Let {
                    binder: fresh,
                    ty: ty.clone(),
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                }
            }
            ObjTerm::Fst(t1) => ObjTerm::fst(go(t1, env, supply)),
            ObjTerm::Snd(t1) => ObjTerm::snd(go(t1, env, supply)),
            ObjTerm::Inl { payload, sum } => ObjTerm::inl(go(payload, env, supply), sum.clone()),
            ObjTerm::Inr { payload, sum } => ObjTerm::inr(go(payload, env, supply), sum.clone()),
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => {
                let scrut = go(scrut, env, supply);
                let lf = supply.fresh(left_binder);
                env.push((left_binder.clone(), lf.clone()));
                let left = go(left, env, supply);
                env.pop();
                let rf = supply.fresh(right_binder);
                env.push((right_binder.clone(), rf.clone()));
                let right = go(right, env, supply);
                env.pop();
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
                go(cond, env, supply),
                go(then, env, supply),
                go(els, env, supply),
            ),
        }
    }
    go(t, &mut Vec::new(), supply)
}

/// Computes the type of an annotated closed term. Total once type
/// reconstruction has filled every binder and injection annotation; panics
/// on missing annotations, which indicates a pipeline bug.
pub fn type_of(t: &ObjTerm, env: &TypeEnv) -> ObjType {
    type_of_with(t, env, &[])
}

/// [`type_of`] under an additional stack of local binder types.
pub fn type_of_with(t: &ObjTerm, env: &TypeEnv, locals: &[(Name, ObjType)]) -> ObjType {
    fn go(t: &ObjTerm, env: &TypeEnv, locals: &mut Vec<(Name, ObjType)>) -> ObjType {
        match t {
            ObjTerm::Var(x) => locals
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, t)| t.clone())
                .or_else(|| env.lookup(x).cloned())
                .unwrap_or_else(|| panic!("type_of: unbound variable {x}")),
            ObjTerm::Lit(l) => ObjType::Base(l.base()),
            ObjTerm::ConstApp { c, inst, .. } => c.signature().result_type(inst.as_ref()),
            ObjTerm::Lam { binder, ty, body } => {
                let bty = ty.clone().expect("type_of: unannotated lambda");
                locals.push((binder.clone(), bty.clone()));
                let cod = go(body, env, locals);
                locals.pop();
                ObjType::fun(bty, cod)
            }
            ObjTerm::App(f, _) => match go(f, env, locals) {
                ObjType::Fun(_, cod) => *cod,
                other => panic!("type_of: applying non-function {other:?}"),
            },
            ObjTerm::Let {
                binder, ty, body, ..
            } => {
                let bty = ty.clone().expect("type_of: unannotated let");
                locals.push((binder.clone(), bty));
                let r = go(body, env, locals);
                locals.pop();
                r
            }
            ObjTerm::Pair(a, b) => ObjType::prod(go(a, env, locals), go(b, env, locals)),
            ObjTerm::Fst(p) => match go(p, env, locals) {
                ObjType::Prod(l, _) => *l,
                other => panic!("type_of: fst of non-pair {other:?}"),
            },
            ObjTerm::Snd(p) => match go(p, env, locals) {
                ObjType::Prod(_, r) => *r,
                other => panic!("type_of: snd of non-pair {other:?}"),
            },
            ObjTerm::Inl { sum, .. } | ObjTerm::Inr { sum, .. } => {
                sum.clone().expect("type_of: unannotated injection")
            }
            ObjTerm::Case {
                left_binder,
                left_ty,
                left,
                ..
            } => {
                let bty = left_ty.clone().expect("type_of: unannotated case");
                locals.push((left_binder.clone(), bty));
                let r = go(left, env, locals);
                locals.pop();
                r
            }
            ObjTerm::If { then, .. } => go(then, env, locals),
        }
    }
    let mut locals = locals.to_vec();
    go(t, env, &mut locals)
}

/// True when every binder name in the term is distinct.
pub fn binders_unique(t: &ObjTerm) -> bool {
    let mut seen = HashSet::new();
    let mut ok = true;
    t.walk(&mut |s| {
        let mut check = |n: &Name| {
            if !seen.insert(n.clone()) {
                ok = false;
            }
        };
        match s {
            ObjTerm::Lam { binder, .. } | ObjTerm::Let { binder, .. } => check(binder),
            ObjTerm::Case {
                left_binder,
                right_binder,
                ..
            } => {
                check(left_binder);
                check(right_binder);
            }
            _ => {}
        }
    });
    ok
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Bool => write!(f, "Bool"),
            Base::Int => write!(f, "Int"),
            Base::Float => write!(f, "Float"),
            Base::Unit => write!(f, "Unit"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::Const;

    fn plus(a: ObjTerm, b: ObjTerm) -> ObjTerm {
        ObjTerm::const_app(Const::Add, vec![a, b])
    }

    // Brute-force free-variable oracle: collect every Var occurrence, then
    // remove those bound by an enclosing binder along the path.
    fn free_vars_oracle(t: &ObjTerm) -> BTreeSet<Name> {
        fn go(t: &ObjTerm, bound: &Vec<Name>, out: &mut BTreeSet<Name>) {
            match t {
                ObjTerm::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                ObjTerm::Lit(_) => {}
                ObjTerm::ConstApp { args, .. } => args.iter().for_each(|a| go(a, bound, out)),
                ObjTerm::Lam { binder, body, .. } => {
                    let mut b = bound.clone();
                    b.push(binder.clone());
                    go(body, &b, out);
                }
                ObjTerm::App(l, r) | ObjTerm::Pair(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
                ObjTerm::Let {
                    binder, rhs, body, ..
                } => {
                    go(rhs, bound, out);
                    let mut b = bound.clone();
                    b.push(binder.clone());
                    go(body, &b, out);
                }
                ObjTerm::Fst(x) | ObjTerm::Snd(x) => go(x, bound, out),
                ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => {
                    go(payload, bound, out)
                }
                ObjTerm::Case {
                    scrut,
                    left_binder,
                    left,
                    right_binder,
                    right,
                    ..
                } => {
                    go(scrut, bound, out);
                    let mut bl = bound.clone();
                    bl.push(left_binder.clone());
                    go(left, &bl, out);
                    let mut br = bound.clone();
                    br.push(right_binder.clone());
                    go(right, &br, out);
                }
                ObjTerm::If { cond, then, els } => {
                    go(cond, bound, out);
                    go(then, bound, out);
                    go(els, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(t, &Vec::new(), &mut out);
        out
    }

    #[test]
    fn free_vars_basics() {
        assert_eq!(
            free_vars(&ObjTerm::var("x")),
            BTreeSet::from(["x".to_string()])
        );
        let t = ObjTerm::lam("x", ObjTerm::app(ObjTerm::var("x"), ObjTerm::var("y")));
        assert_eq!(free_vars(&t), BTreeSet::from(["y".to_string()]));
    }

    #[test]
    fn free_vars_let_matches_oracle() {
        // let x = y + 1 in x
        let t = ObjTerm::let_(
            "x",
            plus(ObjTerm::var("y"), ObjTerm::int(1)),
            ObjTerm::var("x"),
        );
        let expected = BTreeSet::from(["y".to_string()]);
        assert_eq!(free_vars(&t), expected);
        assert_eq!(free_vars_oracle(&t), expected);
    }

    #[test]
    fn subst_basics() {
        assert_eq!(
            subst(&ObjTerm::var("x"), "x", &ObjTerm::int(3)),
            ObjTerm::int(3)
        );
        let id = ObjTerm::lam("x", ObjTerm::var("x"));
        assert_eq!(subst(&id, "x", &ObjTerm::int(3)), id);
    }

    // Reference locally-nameless substitution for cross-checking capture
    // avoidance: convert to de Bruijn, substitute, compare alpha-classes.
    #[derive(Clone, Debug, PartialEq)]
    enum Db {
        Bound(usize),
        Free(Name),
        Lam(Box<Db>),
        App(Box<Db>, Box<Db>),
        Lit(i32),
    }

    fn to_db(t: &ObjTerm, stack: &mut Vec<Name>) -> Db {
        match t {
            ObjTerm::Var(x) => match stack.iter().rev().position(|b| b == x) {
                Some(i) => Db::Bound(i),
                None => Db::Free(x.clone()),
            },
            ObjTerm::Lit(Lit::Int(n)) => Db::Lit(*n),
            ObjTerm::Lam { binder, body, .. } => {
                stack.push(binder.clone());
                let b = to_db(body, stack);
                stack.pop();
                Db::Lam(Box::new(b))
            }
            ObjTerm::App(f, a) => Db::App(Box::new(to_db(f, stack)), Box::new(to_db(a, stack))),
            _ => panic!("oracle handles the lambda fragment only"),
        }
    }

    fn db_shift(t: &Db, by: usize, from: usize) -> Db {
        match t {
            Db::Bound(i) => Db::Bound(if *i >= from { i + by } else { *i }),
            Db::Free(x) => Db::Free(x.clone()),
            Db::Lam(b) => Db::Lam(Box::new(db_shift(b, by, from + 1))),
            Db::App(f, a) => Db::App(Box::new(db_shift(f, by, from)), Box::new(db_shift(a, by, from))),
            Db::Lit(n) => Db::Lit(*n),
        }
    }

    fn db_subst_free(t: &Db, x: &str, v: &Db, depth: usize) -> Db {
        match t {
            Db::Free(y) if y == x => db_shift(v, depth, 0),
            Db::Free(_) | Db::Bound(_) | Db::Lit(_) => t.clone(),
            Db::Lam(b) => Db::Lam(Box::new(db_subst_free(b, x, v, depth + 1))),
            Db::App(f, a) => Db::App(
                Box::new(db_subst_free(f, x, v, depth)),
                Box::new(db_subst_free(a, x, v, depth)),
            ),
        }
    }

    #[test]
    fn subst_capture_matches_locally_nameless_reference() {
        // subst(\y. x, x, y) must rename y.
        let t = ObjTerm::lam("y", ObjTerm::var("x"));
        let v = ObjTerm::var("y");
        let got = subst(&t, "x", &v);
        // Expected shape: \y'. y with fresh y'.
        match &got {
            ObjTerm::Lam { binder, body, .. } => {
                assert_ne!(binder, "y");
                assert_eq!(**body, ObjTerm::var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let got_db = to_db(&got, &mut Vec::new());
        let want_db = db_subst_free(&to_db(&t, &mut Vec::new()), "x", &to_db(&v, &mut Vec::new()), 0);
        assert_eq!(got_db, want_db);
    }

    #[test]
    fn values() {
        let lam = ObjTerm::lam("x", plus(ObjTerm::var("x"), ObjTerm::int(1)));
        assert!(is_value(&lam));
        assert!(!is_value(&plus(ObjTerm::int(1), ObjTerm::int(2))));
        // Pair with a constant application inside is not a value.
        let p = ObjTerm::pair(
            ObjTerm::int(0),
            ObjTerm::const_app(Const::Sqrt, vec![ObjTerm::float(2.0)]),
        );
        assert!(!is_value(&p));
    }

    #[test]
    fn alpha_equality() {
        let a = ObjTerm::lam("x", ObjTerm::var("x"));
        let b = ObjTerm::lam("y", ObjTerm::var("y"));
        assert!(alpha_eq(&a, &b));
        let c = ObjTerm::lam("x", ObjTerm::int(1));
        assert!(!alpha_eq(&a, &c));
        // Bound/free must not be conflated.
        let d = ObjTerm::lam("x", ObjTerm::var("z"));
        let e = ObjTerm::lam("y", ObjTerm::var("y"));
        assert!(!alpha_eq(&d, &e));
    }

    #[test]
    fn representability() {
        assert!(is_representable(&ObjType::prod(ObjType::INT, ObjType::FLOAT)));
        assert!(!is_representable(&ObjType::fun(ObjType::FLOAT, ObjType::FLOAT)));
        // Maybe Float = Unit + Float is not representable.
        assert!(!is_representable(&ObjType::sum(ObjType::UNIT, ObjType::FLOAT)));
        assert!(is_representable(&ObjType::array(ObjType::FLOAT)));
    }

    #[test]
    fn subformula_sets() {
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        assert_eq!(
            subformulas(&ff),
            BTreeSet::from([ff.clone(), ObjType::FLOAT])
        );
        assert_eq!(subformulas(&ObjType::INT), BTreeSet::from([ObjType::INT]));
        let t = ObjType::prod(ObjType::INT, ObjType::fun(ObjType::INT, ObjType::INT));
        assert_eq!(
            subformulas(&t),
            BTreeSet::from([
                t.clone(),
                ObjType::INT,
                ObjType::fun(ObjType::INT, ObjType::INT)
            ])
        );
        assert_eq!(
            proper_subformulas(&ff),
            BTreeSet::from([ObjType::FLOAT])
        );
    }

    #[test]
    fn subformulas_are_closed() {
        let t = ObjType::fun(
            ObjType::prod(ObjType::INT, ObjType::fun(ObjType::BOOL, ObjType::FLOAT)),
            ObjType::sum(ObjType::UNIT, ObjType::INT),
        );
        let s = subformulas(&t);
        for sub in &s {
            assert!(subformulas(sub).is_subset(&s), "not closed at {sub:?}");
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&ObjType::FLOAT), 0);
        assert_eq!(rank(&ObjType::fun(ObjType::FLOAT, ObjType::FLOAT)), 1);
        // while at state (Int, Float): ((s -> Bool) -> (s -> s) -> s -> s) has rank 2.
        let s = ObjType::prod(ObjType::INT, ObjType::FLOAT);
        let while_ty = Const::While.signature().full_type(Some(&s));
        assert_eq!(rank(&while_ty), 2);
    }

    #[test]
    fn representable_implies_rank_zero() {
        for ty in [
            ObjType::INT,
            ObjType::prod(ObjType::INT, ObjType::array(ObjType::FLOAT)),
            ObjType::UNIT,
        ] {
            assert!(is_representable(&ty));
            assert_eq!(rank(&ty), 0);
        }
    }

    #[test]
    fn uniquify_gives_unique_binders_and_alpha_equal_term() {
        let t = ObjTerm::app(
            ObjTerm::lam("x", ObjTerm::var("x")),
            ObjTerm::let_("x", ObjTerm::int(1), ObjTerm::var("x")),
        );
        let mut supply = NameSupply::new();
        let u = uniquify(&t, &mut supply);
        assert!(binders_unique(&u));
        assert!(alpha_eq(&t, &u));
    }
}
