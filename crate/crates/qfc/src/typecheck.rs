//! Type reconstruction for closed object terms.
//!
//! Inference exists to resolve the fixed-menu overloading (numeric literals
//! and arithmetic at Int or Float) and to instantiate schematic constants
//! monomorphically per occurrence, checking their representability
//! constraints. The pre-normalization term is full of unannotated redexes,
//! so reconstruction runs unification over metavariables, checks against the
//! entry ascription, and finally defaults unconstrained numeric variables to
//! Int. The result is the same term with every binder, injection, literal,
//! and constant instance annotated — every subterm then has a unique,
//! syntax-directed type.

use std::collections::HashMap;

use crate::ast::{
    is_representable, type_of, uniquify, Base, Lit, NameSupply, ObjTerm, ObjType, TypeEnv,
};
use crate::consts::Placeholder;
use crate::diag::{codes, Diagnostic, Result};
use crate::pretty::pretty_type;

/// A fully annotated term together with its environment and top type.
#[derive(Clone, Debug)]
pub struct TypedTerm {
    pub term: ObjTerm,
    pub top: ObjType,
    pub env: TypeEnv,
}

impl TypedTerm {
    /// Type of the whole term; recomputable for any subterm via
    /// [`crate::ast::type_of`] thanks to the annotations.
    pub fn top_type(&self) -> &ObjType {
        &self.top
    }
}

#[derive(Clone, Debug, PartialEq)]
enum ITy {
    Var(u32),
    Base(Base),
    Fun(Box<ITy>, Box<ITy>),
    Prod(Box<ITy>, Box<ITy>),
    Sum(Box<ITy>, Box<ITy>),
    Array(Box<ITy>),
}

fn lift(ty: &ObjType) -> ITy {
    match ty {
        ObjType::Base(b) => ITy::Base(*b),
        ObjType::Fun(a, b) => ITy::Fun(Box::new(lift(a)), Box::new(lift(b))),
        ObjType::Prod(a, b) => ITy::Prod(Box::new(lift(a)), Box::new(lift(b))),
        ObjType::Sum(a, b) => ITy::Sum(Box::new(lift(a)), Box::new(lift(b))),
        ObjType::Array(e) => ITy::Array(Box::new(lift(e))),
    }
}

struct Infer {
    subst: Vec<Option<ITy>>,
    numeric: Vec<bool>,
    binders: HashMap<String, ITy>,
    /// Pre-order slots for nodes that need annotations in the rewrite pass:
    /// constant instantiations, injection sum types, and integer literals.
    slots: Vec<ITy>,
}

impl Infer {
    fn fresh(&mut self) -> ITy {
        let id = self.subst.len() as u32;
        self.subst.push(None);
        self.numeric.push(false);
        ITy::Var(id)
    }

    fn fresh_numeric(&mut self) -> ITy {
        let v = self.fresh();
        if let ITy::Var(id) = v {
            self.numeric[id as usize] = true;
        }
        v
    }

    fn shallow_resolve(&self, t: &ITy) -> ITy {
        let mut t = t.clone();
        while let ITy::Var(id) = t {
            match &self.subst[id as usize] {
                Some(next) => t = next.clone(),
                None => return ITy::Var(id),
            }
        }
        t
    }

    fn occurs(&self, id: u32, t: &ITy) -> bool {
        match self.shallow_resolve(t) {
            ITy::Var(v) => v == id,
            ITy::Base(_) => false,
            ITy::Fun(a, b) | ITy::Prod(a, b) | ITy::Sum(a, b) => {
                self.occurs(id, &a) || self.occurs(id, &b)
            }
            ITy::Array(e) => self.occurs(id, &e),
        }
    }

    fn describe(&self, t: &ITy) -> String {
        match self.shallow_resolve(t) {
            ITy::Var(_) => "_".to_string(),
            ITy::Base(b) => b.to_string(),
            ITy::Fun(a, b) => format!("({} -> {})", self.describe(&a), self.describe(&b)),
            ITy::Prod(a, b) => format!("({}, {})", self.describe(&a), self.describe(&b)),
            ITy::Sum(a, b) => format!("({} + {})", self.describe(&a), self.describe(&b)),
            ITy::Array(e) => format!("Arr {}", self.describe(&e)),
        }
    }

    fn mismatch(&self, a: &ITy, b: &ITy) -> Diagnostic {
        Diagnostic::new(
            codes::TYPE_MISMATCH,
            format!(
                "cannot match type {} with {}",
                self.describe(a),
                self.describe(b)
            ),
        )
    }

    fn bind(&mut self, id: u32, t: ITy) -> Result<()> {
        if self.occurs(id, &t) {
            return Err(Diagnostic::new(
                codes::TYPE_MISMATCH,
                "infinite type during reconstruction",
            ));
        }
        // A numeric variable may only stand for Int, Float, or another
        // numeric variable.
        if self.numeric[id as usize] {
            match &t {
                ITy::Var(other) => {
                    let o = *other as usize;
                    self.numeric[o] = true;
                }
                ITy::Base(Base::Int) | ITy::Base(Base::Float) => {}
                other => {
                    return Err(Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!(
                            "numeric operation used at non-numeric type {}",
                            self.describe(other)
                        ),
                    ))
                }
            }
        }
        self.subst[id as usize] = Some(t);
        Ok(())
    }

    fn unify(&mut self, a: &ITy, b: &ITy) -> Result<()> {
        let (a, b) = (self.shallow_resolve(a), self.shallow_resolve(b));
        match (a, b) {
            (ITy::Var(x), ITy::Var(y)) if x == y => Ok(()),
            (ITy::Var(x), t) | (t, ITy::Var(x)) => self.bind(x, t),
            (ITy::Base(x), ITy::Base(y)) if x == y => Ok(()),
            (ITy::Fun(a1, b1), ITy::Fun(a2, b2))
            | (ITy::Prod(a1, b1), ITy::Prod(a2, b2))
            | (ITy::Sum(a1, b1), ITy::Sum(a2, b2)) => {
                self.unify(&a1, &a2)?;
                self.unify(&b1, &b2)
            }
            (ITy::Array(e1), ITy::Array(e2)) => self.unify(&e1, &e2),
            (a, b) => Err(self.mismatch(&a, &b)),
        }
    }

    fn infer(&mut self, t: &ObjTerm, env: &TypeEnv) -> Result<ITy> {
        match t {
            ObjTerm::Var(x) => {
                if let Some(ty) = self.binders.get(x) {
                    return Ok(ty.clone());
                }
                if let Some(ty) = env.lookup(x) {
                    return Ok(lift(ty));
                }
                Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("unbound variable `{x}` during reconstruction"),
                ))
            }
            ObjTerm::Lit(l) => match l {
                Lit::Int(_) => {
                    let v = self.fresh_numeric();
                    self.slots.push(v.clone());
                    Ok(v)
                }
                Lit::Float(_) => Ok(ITy::Base(Base::Float)),
                Lit::Bool(_) => Ok(ITy::Base(Base::Bool)),
                Lit::Unit => Ok(ITy::Base(Base::Unit)),
            },
            ObjTerm::ConstApp { c, inst, args } => {
                let sig = c.signature();
                let hole = match sig.placeholder {
                    Placeholder::None => None,
                    Placeholder::Numeric => Some(self.fresh_numeric()),
                    Placeholder::Representable | Placeholder::Any => Some(self.fresh()),
                };
                if let (Some(h), Some(existing)) = (&hole, inst) {
                    self.unify(h, &lift(existing))?;
                }
                self.slots
                    .push(hole.clone().unwrap_or(ITy::Base(Base::Unit)));
                for (arg, scheme) in args.iter().zip(&sig.args) {
                    let want = lift_scheme(scheme, &hole);
                    let got = self.infer(arg, env)?;
                    self.unify(&got, &want).map_err(|d| {
                        Diagnostic::new(
                            d.code,
                            format!("in argument of `{}`: {}", sig.name, d.message),
                        )
                    })?;
                }
                Ok(lift_scheme(&sig.result, &hole))
            }
            ObjTerm::Lam { binder, ty, body } => {
                let a = self.fresh();
                if let Some(annot) = ty {
                    self.unify(&a, &lift(annot))?;
                }
                self.binders.insert(binder.clone(), a.clone());
                let b = self.infer(body, env)?;
                Ok(ITy::Fun(Box::new(a), Box::new(b)))
            }
            ObjTerm::App(f, arg) => {
                let tf = self.infer(f, env)?;
                let ta = self.infer(arg, env)?;
                let r = self.fresh();
                self.unify(&tf, &ITy::Fun(Box::new(ta), Box::new(r.clone())))?;
                Ok(r)
            }
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let tr = self.infer(rhs, env)?;
                if let Some(annot) = ty {
                    self.unify(&tr, &lift(annot))?;
                }
                self.binders.insert(binder.clone(), tr);
                self.infer(body, env)
            }
            ObjTerm::Pair(a, b) => {
                let ta = self.infer(a, env)?;
                let tb = self.infer(b, env)?;
                Ok(ITy::Prod(Box::new(ta), Box::new(tb)))
            }
            ObjTerm::Fst(p) => {
                let tp = self.infer(p, env)?;
                let a = self.fresh();
                let b = self.fresh();
                self.unify(&tp, &ITy::Prod(Box::new(a.clone()), Box::new(b)))?;
                Ok(a)
            }
            ObjTerm::Snd(p) => {
                let tp = self.infer(p, env)?;
                let a = self.fresh();
                let b = self.fresh();
                self.unify(&tp, &ITy::Prod(Box::new(a), Box::new(b.clone())))?;
                Ok(b)
            }
            ObjTerm::Inl { payload, sum } => {
                // The slot is pushed before the payload is inferred so the
                // rewrite pass consumes slots in the same pre-order.
                let l = self.fresh();
                let r = self.fresh();
                let s = ITy::Sum(Box::new(l.clone()), Box::new(r));
                if let Some(annot) = sum {
                    self.unify(&s, &lift(annot))?;
                }
                self.slots.push(s.clone());
                let tp = self.infer(payload, env)?;
                self.unify(&l, &tp)?;
                Ok(s)
            }
            ObjTerm::Inr { payload, sum } => {
                let l = self.fresh();
                let r = self.fresh();
                let s = ITy::Sum(Box::new(l), Box::new(r.clone()));
                if let Some(annot) = sum {
                    self.unify(&s, &lift(annot))?;
                }
                self.slots.push(s.clone());
                let tp = self.infer(payload, env)?;
                self.unify(&r, &tp)?;
                Ok(s)
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left,
                right_binder,
                right,
                ..
            } => {
                let ts = self.infer(scrut, env)?;
                let a = self.fresh();
                let b = self.fresh();
                self.unify(
                    &ts,
                    &ITy::Sum(Box::new(a.clone()), Box::new(b.clone())),
                )?;
                self.binders.insert(left_binder.clone(), a);
                let tl = self.infer(left, env)?;
                self.binders.insert(right_binder.clone(), b);
                let tr = self.infer(right, env)?;
                self.unify(&tl, &tr)?;
                Ok(tl)
            }
            ObjTerm::If { cond, then, els } => {
                let tc = self.infer(cond, env)?;
                self.unify(&tc, &ITy::Base(Base::Bool))?;
                let tt = self.infer(then, env)?;
                let te = self.infer(els, env)?;
                self.unify(&tt, &te)?;
                Ok(tt)
            }
        }
    }

    /// Defaults every unresolved numeric variable to Int.
    fn default_numerics(&mut self) {
        for id in 0..self.subst.len() {
            if self.subst[id].is_none() && self.numeric[id] {
                // Walk to the representative first.
                let rep = self.shallow_resolve(&ITy::Var(id as u32));
                if let ITy::Var(r) = rep {
                    self.subst[r as usize] = Some(ITy::Base(Base::Int));
                }
            }
        }
    }

    fn to_obj(&self, t: &ITy) -> Result<ObjType> {
        match self.shallow_resolve(t) {
            ITy::Var(_) => Err(Diagnostic::new(
                codes::AMBIGUOUS_OVERLOAD,
                "ambiguous type: no context determines this subterm's type",
            )),
            ITy::Base(b) => Ok(ObjType::Base(b)),
            ITy::Fun(a, b) => Ok(ObjType::fun(self.to_obj(&a)?, self.to_obj(&b)?)),
            ITy::Prod(a, b) => Ok(ObjType::prod(self.to_obj(&a)?, self.to_obj(&b)?)),
            ITy::Sum(a, b) => Ok(ObjType::sum(self.to_obj(&a)?, self.to_obj(&b)?)),
            ITy::Array(e) => Ok(ObjType::array(self.to_obj(&e)?)),
        }
    }

    /// Rewrites the term with resolved annotations, consuming slots in the
    /// same pre-order as `infer` pushed them.
    fn annotate(&self, t: &ObjTerm, next: &mut usize) -> Result<ObjTerm> {
        Ok(match t {
            ObjTerm::Var(_) => t.clone(),
            ObjTerm::Lit(Lit::Int(n)) => {
                let ty = self.to_obj(&self.slots[*next])?;
                *next += 1;
                match ty {
                    ObjType::Base(Base::Float) => ObjTerm::float(*n as f64),
                    _ => ObjTerm::int(*n),
                }
            }
            ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, args, .. } => {
                let sig = c.signature();
                let inst = match sig.placeholder {
                    Placeholder::None => {
                        *next += 1;
                        None
                    }
                    _ => {
                        let ty = self.to_obj(&self.slots[*next])?;
                        *next += 1;
                        Some(ty)
                    }
                };
                if let (Placeholder::Representable, Some(ty)) = (sig.placeholder, &inst) {
                    if !is_representable(ty) {
                        return Err(Diagnostic::new(
                            codes::UNREPRESENTABLE_INSTANCE,
                            format!(
                                "`{}` instantiated at non-representable type {}",
                                sig.name,
                                pretty_type(ty)
                            ),
                        ));
                    }
                }
                let args = args
                    .iter()
                    .map(|a| self.annotate(a, next))
                    .collect::<Result<Vec<_>>>()?;
                ObjTerm::ConstApp { c: *c, inst, args }
            }
            ObjTerm::Lam { binder, body, .. } => {
                let ty = self.binder_type(binder)?;
                ObjTerm::Lam {
                    binder: binder.clone(),
                    ty: Some(ty),
                    body: Box::new(self.annotate(body, next)?),
                }
            }
            ObjTerm::App(f, a) => {
                ObjTerm::app(self.annotate(f, next)?, self.annotate(a, next)?)
            }
            ObjTerm::Let {
                binder, rhs, body, ..
            } => {
                let rhs = self.annotate(rhs, next)?;
                let ty = self.binder_type(binder)?;
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: Some(ty),
                    rhs: Box::new(rhs),
                    body: Box::new(self.annotate(body, next)?),
                }
            }
            ObjTerm::Pair(a, b) => {
                ObjTerm::pair(self.annotate(a, next)?, self.annotate(b, next)?)
            }
            ObjTerm::Fst(p) => ObjTerm::fst(self.annotate(p, next)?),
            ObjTerm::Snd(p) => ObjTerm::snd(self.annotate(p, next)?),
            ObjTerm::Inl { payload, .. } => {
                let sum = self.to_obj(&self.slots[*next])?;
                *next += 1;
                ObjTerm::inl(self.annotate(payload, next)?, Some(sum))
            }
            ObjTerm::Inr { payload, .. } => {
                let sum = self.to_obj(&self.slots[*next])?;
                *next += 1;
                ObjTerm::inr(self.annotate(payload, next)?, Some(sum))
            }
            ObjTerm::Case {
                scrut,
                left_binder,
                left,
                right_binder,
                right,
                ..
            } => {
                let scrut = self.annotate(scrut, next)?;
                let left_ty = self.binder_type(left_binder)?;
                let left = self.annotate(left, next)?;
                let right_ty = self.binder_type(right_binder)?;
                let right = self.annotate(right, next)?;
                ObjTerm::Case {
                    scrut: Box::new(scrut),
                    left_binder: left_binder.clone(),
                    left_ty: Some(left_ty),
                    left: Box::new(left),
                    right_binder: right_binder.clone(),
                    right_ty: Some(right_ty),
                    right: Box::new(right),
                }
            }
            ObjTerm::If { cond, then, els } => ObjTerm::if_(
                self.annotate(cond, next)?,
                self.annotate(then, next)?,
                self.annotate(els, next)?,
            ),
        })
    }

    fn binder_type(&self, binder: &str) -> Result<ObjType> {
        let ity = self
            .binders
            .get(binder)
            .unwrap_or_else(|| panic!("binder `{binder}` was never inferred"));
        self.to_obj(ity).map_err(|d| {
            Diagnostic::new(
                d.code,
                format!("binder `{binder}` has an ambiguous type; add an ascription"),
            )
        })
    }
}

fn lift_scheme(s: &crate::consts::SchemeTy, hole: &Option<ITy>) -> ITy {
    use crate::consts::SchemeTy;
    match s {
        SchemeTy::Hole => hole.clone().expect("signature placeholder missing"),
        SchemeTy::Base(b) => ITy::Base(*b),
        SchemeTy::Fun(a, b) => ITy::Fun(
            Box::new(lift_scheme(a, hole)),
            Box::new(lift_scheme(b, hole)),
        ),
        SchemeTy::Prod(a, b) => ITy::Prod(
            Box::new(lift_scheme(a, hole)),
            Box::new(lift_scheme(b, hole)),
        ),
        SchemeTy::Array(e) => ITy::Array(Box::new(lift_scheme(e, hole))),
    }
}

/// Reconstructs types for `t` under `env`, checking against `expected` when
/// given. Binders are renamed apart first; the returned term carries every
/// annotation.
pub fn infer(
    t: &ObjTerm,
    env: &TypeEnv,
    expected: Option<&ObjType>,
    supply: &mut NameSupply,
) -> Result<TypedTerm> {
    let t = uniquify(t, supply);
    let mut ctx = Infer {
        subst: Vec::new(),
        numeric: Vec::new(),
        binders: HashMap::new(),
        slots: Vec::new(),
    };
    let top = ctx.infer(&t, env)?;
    if let Some(want) = expected {
        ctx.unify(&top, &lift(want))?;
    }
    ctx.default_numerics();
    let top = ctx.to_obj(&top).map_err(|d| {
        Diagnostic::new(d.code, format!("top-level type is ambiguous: {}", d.message))
    })?;
    let mut next = 0;
    let term = ctx.annotate(&t, &mut next)?;
    debug_assert_eq!(next, ctx.slots.len());
    debug_assert_eq!(type_of(&term, env), top);
    Ok(TypedTerm {
        term,
        top,
        env: env.clone(),
    })
}

/// A use of a constant the C backend does not accept.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub constant: &'static str,
}

/// Scans a term for constants outside the permitted set.
pub fn check_permitted(t: &ObjTerm) -> Vec<Violation> {
    let mut out = Vec::new();
    t.walk(&mut |s| {
        if let ObjTerm::ConstApp { c, .. } = s {
            if !c.c_permitted() {
                out.push(Violation {
                    constant: c.name(),
                });
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;
    use crate::consts::Const;

    fn infer_closed(t: &ObjTerm, expected: Option<&ObjType>) -> Result<TypedTerm> {
        infer(t, &TypeEnv::new(), expected, &mut NameSupply::new())
    }

    #[test]
    fn ascription_drives_literal_overloading() {
        // \x -> x + 1 at Float -> Float resolves (+) and 1 at Float.
        let t = ObjTerm::lam(
            "x",
            ObjTerm::const_app(Const::Add, vec![ObjTerm::var("x"), ObjTerm::int(1)]),
        );
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let typed = infer_closed(&t, Some(&ff)).unwrap();
        assert_eq!(typed.top, ff);
        match &typed.term {
            ObjTerm::Lam { ty, body, .. } => {
                assert_eq!(ty.as_ref(), Some(&ObjType::FLOAT));
                match &**body {
                    ObjTerm::ConstApp { inst, args, .. } => {
                        assert_eq!(inst.as_ref(), Some(&ObjType::FLOAT));
                        assert_eq!(args[1], ObjTerm::float(1.0));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unconstrained_literals_default_to_int() {
        let t = ObjTerm::let_(
            "y",
            ObjTerm::const_app(Const::Add, vec![ObjTerm::int(1), ObjTerm::int(2)]),
            ObjTerm::float(3.0),
        );
        let typed = infer_closed(&t, None).unwrap();
        assert_eq!(typed.top, ObjType::FLOAT);
        match &typed.term {
            ObjTerm::Let { ty, .. } => assert_eq!(ty.as_ref(), Some(&ObjType::INT)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn while_state_must_be_representable() {
        // while (\s -> False) (\s -> s) (Inl ()) at Maybe Float state.
        let sum = ObjType::sum(ObjType::UNIT, ObjType::FLOAT);
        let t = ObjTerm::ConstApp {
            c: Const::While,
            inst: None,
            args: vec![
                ObjTerm::lam("s", ObjTerm::bool(false)),
                ObjTerm::lam("s", ObjTerm::var("s")),
                ObjTerm::inl(ObjTerm::unit(), Some(sum)),
            ],
        };
        let err = infer_closed(&t, None).unwrap_err();
        assert_eq!(err.code, codes::UNREPRESENTABLE_INSTANCE);
    }

    #[test]
    fn while_at_pair_state_instantiates() {
        // while (\s -> fst s < 3) (\s -> (fst s + 1, snd s)) (0, 0.0)
        let step = ObjTerm::lam(
            "s",
            ObjTerm::pair(
                ObjTerm::const_app(
                    Const::Add,
                    vec![ObjTerm::fst(ObjTerm::var("s")), ObjTerm::int(1)],
                ),
                ObjTerm::snd(ObjTerm::var("s")),
            ),
        );
        let pred = ObjTerm::lam(
            "s",
            ObjTerm::const_app(
                Const::Lt,
                vec![ObjTerm::fst(ObjTerm::var("s")), ObjTerm::int(3)],
            ),
        );
        let t = ObjTerm::ConstApp {
            c: Const::While,
            inst: None,
            args: vec![pred, step, ObjTerm::pair(ObjTerm::int(0), ObjTerm::float(0.0))],
        };
        let typed = infer_closed(&t, None).unwrap();
        let s = ObjType::prod(ObjType::INT, ObjType::FLOAT);
        assert_eq!(typed.top, s);
        match &typed.term {
            ObjTerm::ConstApp { inst, .. } => assert_eq!(inst.as_ref(), Some(&s)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_mismatch_reported() {
        let t = ObjTerm::const_app(Const::Add, vec![ObjTerm::int(1), ObjTerm::bool(true)]);
        let err = infer_closed(&t, None).unwrap_err();
        assert_eq!(err.code, codes::TYPE_MISMATCH);
    }

    #[test]
    fn ambiguous_when_nothing_constrains() {
        // fix (\x -> x) has type a for any a.
        let t = ObjTerm::const_app(Const::Fix, vec![ObjTerm::lam("x", ObjTerm::var("x"))]);
        let err = infer_closed(&t, None).unwrap_err();
        assert_eq!(err.code, codes::AMBIGUOUS_OVERLOAD);
    }

    #[test]
    fn reinference_reproduces_annotations() {
        let t = ObjTerm::lam(
            "x",
            ObjTerm::let_(
                "y",
                ObjTerm::const_app(Const::Mul, vec![ObjTerm::var("x"), ObjTerm::int(1)]),
                ObjTerm::const_app(Const::Mul, vec![ObjTerm::var("y"), ObjTerm::var("y")]),
            ),
        );
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let mut supply = NameSupply::new();
        let once = infer(&t, &TypeEnv::new(), Some(&ff), &mut supply).unwrap();
        let twice = infer(&once.term, &TypeEnv::new(), None, &mut supply).unwrap();
        assert_eq!(twice.top, ff);
        assert!(alpha_eq(&once.term, &twice.term));
    }

    #[test]
    fn array_elements_must_be_representable() {
        // mkArr at a function element type violates the signature constraint.
        let t = ObjTerm::ConstApp {
            c: Const::MkArr,
            inst: None,
            args: vec![
                ObjTerm::int(1),
                ObjTerm::lam("i", ObjTerm::lam("y", ObjTerm::var("y"))),
            ],
        };
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let err = infer_closed(
            &t,
            Some(&ObjType::array(ff)),
        )
        .unwrap_err();
        assert_eq!(err.code, codes::UNREPRESENTABLE_INSTANCE);
    }

    #[test]
    fn permitted_scan_flags_fix_only() {
        let t = ObjTerm::const_app(
            Const::Add,
            vec![
                ObjTerm::int(1),
                ObjTerm::const_app(
                    Const::Fix,
                    vec![ObjTerm::lam("f", ObjTerm::var("f"))],
                ),
            ],
        );
        let violations = check_permitted(&t);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].constant, "fix");
        assert!(check_permitted(&ObjTerm::int(1)).is_empty());
    }
}
