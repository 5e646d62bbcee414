//! Property checkers and the reference interpreter.
//!
//! The checkers test, on concrete typed terms, the subformula property, its
//! sharpened variant, and the first-order characterization. The interpreter
//! is the semantic oracle: big-step, call-by-need (lets and application
//! arguments are memoized thunks; constructors and constants are strict),
//! with a call-by-value mode for the strategy split. `while` iterates its
//! predicate and step, `mkArr` materializes, `ixArr` is bounds-checked,
//! `save` is the identity, and `fix` unfolds lazily under fuel. Integer
//! division by zero is an error; float division follows IEEE.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use crate::ast::{
    is_representable, proper_subformulas, subformulas, type_of_with, Lit, ObjTerm, ObjType,
};
use crate::consts::Const;
use crate::diag::{codes, Diagnostic, Result};
use crate::pretty::{pretty_term, pretty_type};
use crate::typecheck::TypedTerm;

pub const DEFAULT_INTERP_FUEL: u64 = 10_000_000;
const MAX_INTERP_DEPTH: u32 = 40_000;

/// Relative tolerance for float comparison in the oracle.
pub const FLOAT_REL_TOL: f64 = 1e-6;
/// Absolute floor under which floats are considered equal.
pub const FLOAT_ABS_FLOOR: f64 = 1e-9;
/// Fixed seed for reproducible sampling.
pub const ORACLE_SEED: u64 = 0xFE1D5;

// ---------------------------------------------------------------------------
// Property reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Witness {
    pub subject: String,
    pub ty: String,
    pub reason: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} ({})", self.subject, self.ty, self.reason)
    }
}

#[derive(Clone, Debug, Default)]
pub struct PropertyReport {
    pub witnesses: Vec<Witness>,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.witnesses.is_empty()
    }

    fn add(&mut self, subject: &ObjTerm, ty: &ObjType, reason: impl Into<String>) {
        let mut s = pretty_term(subject);
        if s.len() > 60 {
            s.truncate(57);
            s.push_str("...");
        }
        self.witnesses.push(Witness {
            subject: s,
            ty: pretty_type(ty),
            reason: reason.into(),
        });
    }
}

/// Subformula closure of a constant signature: the full type, the argument
/// types, and the result type, but not the partial arrows.
fn sig_subformulas(c: Const, inst: Option<&ObjType>) -> BTreeSet<ObjType> {
    let sig = c.signature();
    let mut out = sig_component_subformulas(c, inst);
    out.insert(sig.full_type(inst));
    out
}

/// As [`sig_subformulas`] without the signature's own arrow type.
fn sig_component_subformulas(c: Const, inst: Option<&ObjType>) -> BTreeSet<ObjType> {
    let sig = c.signature();
    let mut out = BTreeSet::new();
    for a in sig.arg_types(inst) {
        out.extend(subformulas(&a));
    }
    out.extend(subformulas(&sig.result_type(inst)));
    out
}

/// Subformula property: every subterm's type is a subformula of the top
/// type, of an environment type, or of the signature of a constant occurring
/// in the term.
pub fn check_subformula(t: &TypedTerm) -> PropertyReport {
    let mut admissible = subformulas(&t.top);
    for (_, ty) in t.env.iter() {
        admissible.extend(subformulas(ty));
    }
    t.term.walk(&mut |s| {
        if let ObjTerm::ConstApp { c, inst, .. } = s {
            admissible.extend(sig_subformulas(*c, inst.as_ref()));
        }
    });

    let mut report = PropertyReport::default();
    fn walk(
        t: &ObjTerm,
        env: &crate::ast::TypeEnv,
        locals: &mut Vec<(String, ObjType)>,
        admissible: &BTreeSet<ObjType>,
        report: &mut PropertyReport,
    ) {
        let ty = type_of_with(t, env, locals);
        if !admissible.contains(&ty) {
            report.add(t, &ty, "type is not an admissible subformula");
        }
        each_child(t, locals, &mut |child, locals| {
            walk(child, env, locals, admissible, report)
        });
    }
    walk(
        &t.term,
        &t.env,
        &mut Vec::new(),
        &admissible,
        &mut report,
    );
    report
}

/// Sharpened subformula property: every proper subterm that is neither a
/// free-variable occurrence nor part of a constant application has a type
/// that is a proper subformula of the top type, of an environment type, or
/// of the signature of a constant occurring in the term (an elimination
/// spine over a constant application — `fst (snd (while ...))` — carries
/// types from the constant's signature, exactly as in the unsharpened
/// property). Constant-application interiors are checked recursively against
/// the argument signature types and the interior's own free variables.
pub fn check_sharpened(t: &TypedTerm) -> PropertyReport {
    let mut allowed = proper_subformulas(&t.top);
    for (_, ty) in t.env.iter() {
        allowed.extend(proper_subformulas(ty));
    }
    t.term.walk(&mut |s| {
        if let ObjTerm::ConstApp { c, inst, .. } = s {
            // Only the signature's components are admissible, never the
            // signature's own arrow type.
            allowed.extend(sig_component_subformulas(*c, inst.as_ref()));
        }
    });
    let mut report = PropertyReport::default();
    sharpened_walk(
        &t.term,
        &t.env,
        &mut Vec::new(),
        0,
        &allowed,
        true,
        &mut report,
    );
    report
}

// `boundary` marks where the current subject starts on the binder stack:
// variables bound below it are free variables of the subject and exempt,
// but their types are still needed to type interior subterms.
fn sharpened_walk(
    t: &ObjTerm,
    env: &crate::ast::TypeEnv,
    locals: &mut Vec<(String, ObjType)>,
    boundary: usize,
    allowed: &BTreeSet<ObjType>,
    is_root: bool,
    report: &mut PropertyReport,
) {
    // The subject term itself is not a proper subterm of itself.
    if !is_root {
        match t {
            ObjTerm::Var(x)
                if !locals[boundary..].iter().any(|(n, _)| n == x) =>
            {
                return
            }
            // A constant application and everything inside it is exempt from
            // the outer check; its arguments are re-checked against the
            // signature below.
            ObjTerm::ConstApp { .. } => {}
            _ => {
                let ty = type_of_with(t, env, locals);
                if !allowed.contains(&ty) {
                    report.add(t, &ty, "type is not a proper subformula");
                }
            }
        }
    }
    if let ObjTerm::ConstApp { c, inst, args } = t {
        let sig = c.signature();
        let arg_tys = sig.arg_types(inst.as_ref());
        for (arg, aty) in args.iter().zip(&arg_tys) {
            // Recursive application: the interior of each argument is
            // checked against the argument type and the argument's own free
            // variables (which include everything bound outside it), with
            // the same signature carryover for constants inside it.
            let mut inner_allowed = proper_subformulas(aty);
            for (_, ty) in env.iter() {
                inner_allowed.extend(proper_subformulas(ty));
            }
            for (_, ty) in locals.iter() {
                inner_allowed.extend(proper_subformulas(ty));
            }
            arg.walk(&mut |s| {
                if let ObjTerm::ConstApp { c: c2, inst: i2, .. } = s {
                    inner_allowed.extend(sig_component_subformulas(*c2, i2.as_ref()));
                }
            });
            let inner_boundary = locals.len();
            sharpened_walk(
                arg,
                env,
                locals,
                inner_boundary,
                &inner_allowed,
                true,
                report,
            );
        }
        return;
    }
    each_child(t, locals, &mut |child, locals| {
        sharpened_walk(child, env, locals, boundary, allowed, false, report)
    });
}

/// First-order form: every subterm either has representable type or is a
/// lambda spine whose binders and body all have representable type.
pub fn check_first_order(t: &TypedTerm) -> PropertyReport {
    let mut report = PropertyReport::default();
    fn walk(
        t: &ObjTerm,
        env: &crate::ast::TypeEnv,
        locals: &mut Vec<(String, ObjType)>,
        report: &mut PropertyReport,
    ) {
        let ty = type_of_with(t, env, locals);
        if is_representable(&ty) {
            each_child(t, locals, &mut |child, locals| {
                walk(child, env, locals, report)
            });
            return;
        }
        if let ObjTerm::Lam { .. } = t {
            // Collapse the lambda spine.
            let mut spine = t;
            let mut pushed = 0;
            let mut ok = true;
            while let ObjTerm::Lam { binder, ty, body } = spine {
                let bty = ty.clone().expect("unannotated lambda");
                if !is_representable(&bty) {
                    ok = false;
                }
                locals.push((binder.clone(), bty));
                pushed += 1;
                spine = body;
            }
            let body_ty = type_of_with(spine, env, locals);
            if !is_representable(&body_ty) {
                ok = false;
            }
            if !ok {
                report.add(t, &type_of_with(t, env, locals), "non-representable lambda spine");
            }
            walk(spine, env, locals, report);
            for _ in 0..pushed {
                locals.pop();
            }
            return;
        }
        report.add(t, &ty, "non-representable subterm that is not a lambda");
    }
    walk(&t.term, &t.env, &mut Vec::new(), &mut report);
    report
}

/// Visits each direct child with the binder stack extended appropriately.
fn each_child<'t>(
    t: &'t ObjTerm,
    locals: &mut Vec<(String, ObjType)>,
    f: &mut impl FnMut(&'t ObjTerm, &mut Vec<(String, ObjType)>),
) {
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) => {}
        ObjTerm::ConstApp { args, .. } => {
            for a in args {
                f(a, locals);
            }
        }
        ObjTerm::Lam { binder, ty, body } => {
            locals.push((binder.clone(), ty.clone().expect("unannotated lambda")));
            f(body, locals);
            locals.pop();
        }
        ObjTerm::App(l, r) | ObjTerm::Pair(l, r) => {
            f(l, locals);
            f(r, locals);
        }
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => {
            f(rhs, locals);
            locals.push((binder.clone(), ty.clone().expect("unannotated let")));
            f(body, locals);
            locals.pop();
        }
        ObjTerm::Fst(p) | ObjTerm::Snd(p) => f(p, locals),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => f(payload, locals),
        ObjTerm::Case {
            scrut,
            left_binder,
            left_ty,
            left,
            right_binder,
            right_ty,
            right,
        } => {
            f(scrut, locals);
            locals.push((left_binder.clone(), left_ty.clone().expect("unannotated case")));
            f(left, locals);
            locals.pop();
            locals.push((
                right_binder.clone(),
                right_ty.clone().expect("unannotated case"),
            ));
            f(right, locals);
            locals.pop();
        }
        ObjTerm::If { cond, then, els } => {
            f(cond, locals);
            f(then, locals);
            f(els, locals);
        }
    }
}

// ---------------------------------------------------------------------------
// Reference interpreter
// ---------------------------------------------------------------------------

/// Evaluation order for the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalOrder {
    Need,
    Value,
}

/// Runtime values. Floats are doubles, giving headroom over the C backend's
/// single precision.
#[derive(Clone, Debug)]
pub enum Value {
    Int(i32),
    Float(f64),
    Bool(bool),
    Unit,
    Pair(Rc<Value>, Rc<Value>),
    Sum { right: bool, payload: Rc<Value> },
    Fun(Rc<ClosureVal>),
    Arr(Rc<Vec<Value>>),
}

#[derive(Debug)]
pub struct ClosureVal {
    env: Env,
    binder: String,
    body: ObjTerm,
}

#[derive(Debug)]
enum ThunkState {
    Forced(Value),
    Delayed { env: Env, term: ObjTerm },
    DelayedFix(Value),
    InProgress,
}

type Thunk = Rc<RefCell<ThunkState>>;

#[derive(Clone, Debug, Default)]
struct Env(Option<Rc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    name: String,
    thunk: Thunk,
    rest: Env,
}

impl Env {
    fn bind(&self, name: String, thunk: Thunk) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            thunk,
            rest: self.clone(),
        })))
    }
    fn lookup(&self, name: &str) -> Option<Thunk> {
        let mut cur = self;
        while let Env(Some(node)) = cur {
            if node.name == name {
                return Some(node.thunk.clone());
            }
            cur = &node.rest;
        }
        None
    }
}

struct Interp {
    order: EvalOrder,
    fuel: u64,
    depth: u32,
    /// Constant applications evaluated, for work-accounting tests.
    ops: u64,
}

impl Interp {
    fn tick(&mut self) -> Result<()> {
        if self.fuel == 0 {
            return Err(Diagnostic::new(
                codes::INTERP_FUEL,
                "evaluation step budget exhausted",
            ));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn thunk_of(&mut self, env: &Env, term: &ObjTerm) -> Result<Thunk> {
        match self.order {
            EvalOrder::Need => Ok(Rc::new(RefCell::new(ThunkState::Delayed {
                env: env.clone(),
                term: term.clone(),
            }))),
            EvalOrder::Value => {
                let v = self.eval(env, term)?;
                Ok(Rc::new(RefCell::new(ThunkState::Forced(v))))
            }
        }
    }

    fn force(&mut self, thunk: &Thunk) -> Result<Value> {
        let state = std::mem::replace(&mut *thunk.borrow_mut(), ThunkState::InProgress);
        match state {
            ThunkState::Forced(v) => {
                *thunk.borrow_mut() = ThunkState::Forced(v.clone());
                Ok(v)
            }
            ThunkState::Delayed { env, term } => {
                let v = self.eval(&env, &term)?;
                *thunk.borrow_mut() = ThunkState::Forced(v.clone());
                Ok(v)
            }
            ThunkState::DelayedFix(f) => {
                let v = self.apply(f, thunk.clone())?;
                *thunk.borrow_mut() = ThunkState::Forced(v.clone());
                Ok(v)
            }
            ThunkState::InProgress => Err(Diagnostic::new(
                codes::INTERP_FUEL,
                "cyclic forcing during evaluation",
            )),
        }
    }

    fn apply(&mut self, f: Value, arg: Thunk) -> Result<Value> {
        match f {
            Value::Fun(clo) => {
                let env = clo.env.bind(clo.binder.clone(), arg);
                self.eval(&env, &clo.body)
            }
            other => Err(Diagnostic::new(
                codes::TYPE_MISMATCH,
                format!("applying a non-function value {other:?}"),
            )),
        }
    }

    fn eval(&mut self, env: &Env, t: &ObjTerm) -> Result<Value> {
        self.tick()?;
        self.depth += 1;
        if self.depth > MAX_INTERP_DEPTH {
            self.depth -= 1;
            return Err(Diagnostic::new(
                codes::INTERP_FUEL,
                "evaluation recursion too deep",
            ));
        }
        let r = self.eval_inner(env, t);
        self.depth -= 1;
        r
    }

    fn eval_inner(&mut self, env: &Env, t: &ObjTerm) -> Result<Value> {
        match t {
            ObjTerm::Var(x) => {
                let thunk = env.lookup(x).ok_or_else(|| {
                    Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!("unbound variable `{x}` at evaluation"),
                    )
                })?;
                self.force(&thunk)
            }
            ObjTerm::Lit(l) => Ok(match l {
                Lit::Int(v) => Value::Int(*v),
                Lit::Float(v) => Value::Float(*v),
                Lit::Bool(v) => Value::Bool(*v),
                Lit::Unit => Value::Unit,
            }),
            ObjTerm::Lam { binder, body, .. } => Ok(Value::Fun(Rc::new(ClosureVal {
                env: env.clone(),
                binder: binder.clone(),
                body: (**body).clone(),
            }))),
            ObjTerm::App(f, a) => {
                let fv = self.eval(env, f)?;
                let at = self.thunk_of(env, a)?;
                self.apply(fv, at)
            }
            ObjTerm::Let {
                binder, rhs, body, ..
            } => {
                let thunk = self.thunk_of(env, rhs)?;
                let env = env.bind(binder.clone(), thunk);
                self.eval(&env, body)
            }
            ObjTerm::Pair(a, b) => {
                let av = self.eval(env, a)?;
                let bv = self.eval(env, b)?;
                Ok(Value::Pair(Rc::new(av), Rc::new(bv)))
            }
            ObjTerm::Fst(p) => match self.eval(env, p)? {
                Value::Pair(a, _) => Ok((*a).clone()),
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("fst of non-pair {other:?}"),
                )),
            },
            ObjTerm::Snd(p) => match self.eval(env, p)? {
                Value::Pair(_, b) => Ok((*b).clone()),
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("snd of non-pair {other:?}"),
                )),
            },
            ObjTerm::Inl { payload, .. } => Ok(Value::Sum {
                right: false,
                payload: Rc::new(self.eval(env, payload)?),
            }),
            ObjTerm::Inr { payload, .. } => Ok(Value::Sum {
                right: true,
                payload: Rc::new(self.eval(env, payload)?),
            }),
            ObjTerm::Case {
                scrut,
                left_binder,
                left,
                right_binder,
                right,
                ..
            } => match self.eval(env, scrut)? {
                Value::Sum { right: tag, payload } => {
                    let thunk = Rc::new(RefCell::new(ThunkState::Forced((*payload).clone())));
                    if tag {
                        let env = env.bind(right_binder.clone(), thunk);
                        self.eval(&env, right)
                    } else {
                        let env = env.bind(left_binder.clone(), thunk);
                        self.eval(&env, left)
                    }
                }
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("case of non-sum {other:?}"),
                )),
            },
            ObjTerm::If { cond, then, els } => match self.eval(env, cond)? {
                Value::Bool(true) => self.eval(env, then),
                Value::Bool(false) => self.eval(env, els),
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("if of non-boolean {other:?}"),
                )),
            },
            ObjTerm::ConstApp { c, args, .. } => self.constant(env, *c, args),
        }
    }

    fn constant(&mut self, env: &Env, c: Const, args: &[ObjTerm]) -> Result<Value> {
        use Value::*;
        self.ops += 1;
        match c {
            Const::Add | Const::Sub | Const::Mul | Const::Div => {
                let a = self.eval(env, &args[0])?;
                let b = self.eval(env, &args[1])?;
                match (c, a, b) {
                    (Const::Add, Int(x), Int(y)) => Ok(Int(x.wrapping_add(y))),
                    (Const::Sub, Int(x), Int(y)) => Ok(Int(x.wrapping_sub(y))),
                    (Const::Mul, Int(x), Int(y)) => Ok(Int(x.wrapping_mul(y))),
                    (Const::Div, Int(_), Int(0)) => Err(Diagnostic::new(
                        codes::DIV_BY_ZERO_INT,
                        "integer division by zero",
                    )),
                    (Const::Div, Int(x), Int(y)) => Ok(Int(x.wrapping_div(y))),
                    (Const::Add, Float(x), Float(y)) => Ok(Float(x + y)),
                    (Const::Sub, Float(x), Float(y)) => Ok(Float(x - y)),
                    (Const::Mul, Float(x), Float(y)) => Ok(Float(x * y)),
                    (Const::Div, Float(x), Float(y)) => Ok(Float(x / y)),
                    (_, a, b) => Err(Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!("arithmetic on mixed values {a:?} and {b:?}"),
                    )),
                }
            }
            Const::Eq | Const::Lt => {
                let a = self.eval(env, &args[0])?;
                let b = self.eval(env, &args[1])?;
                match (c, a, b) {
                    (Const::Eq, Int(x), Int(y)) => Ok(Bool(x == y)),
                    (Const::Lt, Int(x), Int(y)) => Ok(Bool(x < y)),
                    (Const::Eq, Float(x), Float(y)) => Ok(Bool(x == y)),
                    (Const::Lt, Float(x), Float(y)) => Ok(Bool(x < y)),
                    (_, a, b) => Err(Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!("comparison on mixed values {a:?} and {b:?}"),
                    )),
                }
            }
            Const::DivI | Const::ModI => {
                let a = self.eval(env, &args[0])?;
                let b = self.eval(env, &args[1])?;
                match (a, b) {
                    (Int(_), Int(0)) => Err(Diagnostic::new(
                        codes::DIV_BY_ZERO_INT,
                        "integer division by zero",
                    )),
                    (Int(x), Int(y)) => Ok(Int(if c == Const::DivI {
                        x.wrapping_div(y)
                    } else {
                        x.wrapping_rem(y)
                    })),
                    (a, b) => Err(Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!("div/mod on non-integers {a:?} and {b:?}"),
                    )),
                }
            }
            Const::Sqrt => match self.eval(env, &args[0])? {
                Float(x) => Ok(Float(x.sqrt())),
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("sqrt of non-float {other:?}"),
                )),
            },
            Const::While => {
                let pred = self.eval(env, &args[0])?;
                let step = self.eval(env, &args[1])?;
                let mut state = self.eval(env, &args[2])?;
                loop {
                    self.tick()?;
                    let keep = self.apply(
                        pred.clone(),
                        Rc::new(RefCell::new(ThunkState::Forced(state.clone()))),
                    )?;
                    match keep {
                        Bool(true) => {
                            state = self.apply(
                                step.clone(),
                                Rc::new(RefCell::new(ThunkState::Forced(state.clone()))),
                            )?;
                        }
                        Bool(false) => return Ok(state),
                        other => {
                            return Err(Diagnostic::new(
                                codes::TYPE_MISMATCH,
                                format!("while predicate returned {other:?}"),
                            ))
                        }
                    }
                }
            }
            Const::MkArr => {
                let n = match self.eval(env, &args[0])? {
                    Int(n) => n,
                    other => {
                        return Err(Diagnostic::new(
                            codes::TYPE_MISMATCH,
                            format!("mkArr length is {other:?}"),
                        ))
                    }
                };
                if n < 0 {
                    return Err(Diagnostic::new(
                        codes::IX_OUT_OF_BOUNDS,
                        format!("mkArr with negative length {n}"),
                    ));
                }
                let f = self.eval(env, &args[1])?;
                let mut elems = Vec::with_capacity(n as usize);
                for i in 0..n {
                    self.tick()?;
                    let v = self.apply(
                        f.clone(),
                        Rc::new(RefCell::new(ThunkState::Forced(Int(i)))),
                    )?;
                    elems.push(v);
                }
                Ok(Arr(Rc::new(elems)))
            }
            Const::LnArr => match self.eval(env, &args[0])? {
                Arr(a) => Ok(Int(a.len() as i32)),
                other => Err(Diagnostic::new(
                    codes::TYPE_MISMATCH,
                    format!("lnArr of non-array {other:?}"),
                )),
            },
            Const::IxArr => {
                let a = self.eval(env, &args[0])?;
                let i = self.eval(env, &args[1])?;
                match (a, i) {
                    (Arr(a), Int(i)) => {
                        if i < 0 || (i as usize) >= a.len() {
                            Err(Diagnostic::new(
                                codes::IX_OUT_OF_BOUNDS,
                                format!("index {i} out of bounds for array of length {}", a.len()),
                            ))
                        } else {
                            Ok(a[i as usize].clone())
                        }
                    }
                    (a, i) => Err(Diagnostic::new(
                        codes::TYPE_MISMATCH,
                        format!("ixArr on {a:?} and {i:?}"),
                    )),
                }
            }
            Const::Save => self.eval(env, &args[0]),
            Const::Fix => {
                let f = self.eval(env, &args[0])?;
                let thunk = Rc::new(RefCell::new(ThunkState::DelayedFix(f)));
                self.force(&thunk)
            }
        }
    }
}

/// Evaluates a closed term applied to `args`, which must match the top-type
/// spine.
pub fn interp(t: &ObjTerm, args: &[Value], fuel: u64) -> Result<Value> {
    interp_with(t, args, fuel, EvalOrder::Need)
}

pub fn interp_with(t: &ObjTerm, args: &[Value], fuel: u64, order: EvalOrder) -> Result<Value> {
    interp_counting(t, args, fuel, order).map(|(v, _)| v)
}

/// As [`interp_with`], also reporting how many constant applications were
/// evaluated.
pub fn interp_counting(
    t: &ObjTerm,
    args: &[Value],
    fuel: u64,
    order: EvalOrder,
) -> Result<(Value, u64)> {
    let mut interp = Interp {
        order,
        fuel,
        depth: 0,
        ops: 0,
    };
    let mut v = interp.eval(&Env::default(), t)?;
    for a in args {
        let thunk = Rc::new(RefCell::new(ThunkState::Forced(a.clone())));
        v = interp.apply(v, thunk)?;
    }
    Ok((v, interp.ops))
}

// ---------------------------------------------------------------------------
// Sampling and comparison
// ---------------------------------------------------------------------------

/// Deterministic splitmix64 generator; the oracle has no randomness beyond
/// the fixed seed.
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Samples one runtime value of the given representable type. Floats stay
/// away from zero so negative-power corpus programs remain in single
/// precision range; array lengths run up to 64.
pub fn sample_value(ty: &ObjType, rng: &mut Rng) -> Value {
    match ty {
        ObjType::Base(crate::ast::Base::Int) => {
            Value::Int((rng.next_u64() % 41) as i32 - 20)
        }
        ObjType::Base(crate::ast::Base::Float) => {
            let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
            Value::Float(sign * (0.05 + 3.95 * rng.unit_f64()))
        }
        ObjType::Base(crate::ast::Base::Bool) => Value::Bool(rng.next_u64() & 1 == 0),
        ObjType::Base(crate::ast::Base::Unit) => Value::Unit,
        ObjType::Prod(a, b) => Value::Pair(
            Rc::new(sample_value(a, rng)),
            Rc::new(sample_value(b, rng)),
        ),
        ObjType::Array(e) => {
            let len = (rng.next_u64() % 65) as usize;
            Value::Arr(Rc::new(
                (0..len).map(|_| sample_value(e, rng)).collect(),
            ))
        }
        other => panic!("cannot sample non-representable type {other:?}"),
    }
}

/// Samples an argument vector for a first-order signature.
pub fn sample_args(arg_types: &[&ObjType], rng: &mut Rng) -> Vec<Value> {
    arg_types.iter().map(|t| sample_value(t, rng)).collect()
}

/// Structural comparison with float tolerance. NaNs and equal-signed
/// infinities compare equal.
pub fn values_agree(a: &Value, b: &Value, rel: f64, abs_floor: f64) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Unit, Value::Unit) => true,
        (Value::Float(x), Value::Float(y)) => floats_agree(*x, *y, rel, abs_floor),
        (Value::Pair(a1, b1), Value::Pair(a2, b2)) => {
            values_agree(a1, a2, rel, abs_floor) && values_agree(b1, b2, rel, abs_floor)
        }
        (
            Value::Sum {
                right: r1,
                payload: p1,
            },
            Value::Sum {
                right: r2,
                payload: p2,
            },
        ) => r1 == r2 && values_agree(p1, p2, rel, abs_floor),
        (Value::Arr(x), Value::Arr(y)) => {
            x.len() == y.len()
                && x.iter()
                    .zip(y.iter())
                    .all(|(a, b)| values_agree(a, b, rel, abs_floor))
        }
        _ => false,
    }
}

pub fn floats_agree(x: f64, y: f64, rel: f64, abs_floor: f64) -> bool {
    if x.is_nan() && y.is_nan() {
        return true;
    }
    if x.is_infinite() || y.is_infinite() {
        return x == y;
    }
    let diff = (x - y).abs();
    diff <= abs_floor || diff <= rel * x.abs().max(y.abs())
}

/// Compares two closed terms of the same first-order top type on seeded
/// pseudorandom inputs.
pub fn oracle_compare(
    a: &ObjTerm,
    b: &ObjTerm,
    top: &ObjType,
    samples: usize,
    seed: u64,
    fuel: u64,
) -> PropertyReport {
    let mut report = PropertyReport::default();
    let (arg_types, _) = top.uncurry();
    let mut rng = Rng::new(seed);
    for i in 0..samples {
        let args = sample_args(&arg_types, &mut rng);
        let ra = interp(a, &args, fuel);
        let rb = interp(b, &args, fuel);
        match (ra, rb) {
            (Ok(va), Ok(vb)) => {
                if !values_agree(&va, &vb, FLOAT_REL_TOL, FLOAT_ABS_FLOOR) {
                    report.witnesses.push(Witness {
                        subject: format!("sample {i}"),
                        ty: pretty_type(top),
                        reason: format!("results differ: {va:?} vs {vb:?}"),
                    });
                }
            }
            (Err(ea), Err(eb)) => {
                if ea.code != eb.code {
                    report.witnesses.push(Witness {
                        subject: format!("sample {i}"),
                        ty: pretty_type(top),
                        reason: format!("errors differ: {} vs {}", ea.code, eb.code),
                    });
                }
            }
            (Err(e), Ok(_)) | (Ok(_), Err(e)) => {
                report.witnesses.push(Witness {
                    subject: format!("sample {i}"),
                    ty: pretty_type(top),
                    reason: format!("one side failed: {e}"),
                });
            }
        }
    }
    report
}
