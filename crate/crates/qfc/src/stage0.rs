//! The generation stage.
//!
//! Runs the surface program under call-by-value semantics. Quoted code is
//! walked into an object term; splices escape back to the generation stage
//! and must produce quoted values, whose terms are grafted in place. The
//! stage is dynamically checked; errors carry source positions.

use std::rc::Rc;

use crate::ast::{Lit, ObjTerm};
use crate::consts::Const;
use crate::diag::{codes, Diagnostic, Pos, Result};
use crate::surface::{BinOp, Builtin, Expr, ExprKind, Pat, SourceModule};

pub const DEFAULT_META_FUEL: u64 = 10_000_000;

/// Generation-stage values.
#[derive(Clone, Debug)]
pub enum MetaVal {
    Int(i64),
    Bool(bool),
    Closure {
        env: Env,
        binder: String,
        body: Rc<Expr>,
    },
    Quoted(ObjTerm),
}

impl MetaVal {
    fn describe(&self) -> &'static str {
        match self {
            MetaVal::Int(_) => "an integer",
            MetaVal::Bool(_) => "a boolean",
            MetaVal::Closure { .. } => "a function",
            MetaVal::Quoted(_) => "a quoted term",
        }
    }
}

/// Persistent environment for closures.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<Frame>>);

#[derive(Debug)]
struct Frame {
    name: String,
    val: MetaVal,
    rest: Env,
}

impl Env {
    pub fn empty() -> Env {
        Env(None)
    }
    fn bind(&self, name: String, val: MetaVal) -> Env {
        Env(Some(Rc::new(Frame {
            name,
            val,
            rest: self.clone(),
        })))
    }
    fn lookup(&self, name: &str) -> Option<&MetaVal> {
        let mut cur = self;
        while let Env(Some(f)) = cur {
            if f.name == name {
                return Some(&f.val);
            }
            cur = &f.rest;
        }
        None
    }
}

struct Evaluator {
    def_bodies: Vec<(String, Rc<Expr>)>,
    fuel: u64,
    depth: u32,
}

/// Native recursion guard: tail calls are looped, so this bounds only
/// genuinely nested evaluation.
const MAX_META_DEPTH: u32 = 20_000;

enum Step {
    Done(MetaVal),
    Tail(Env, Rc<Expr>),
}

impl Evaluator {
    fn new(defs: &SourceModule, fuel: u64) -> Evaluator {
        let def_bodies = defs
            .defs
            .iter()
            .map(|d| (d.name.clone(), Rc::new(d.body.clone())))
            .collect();
        let _ = defs;
        Evaluator {
            def_bodies,
            fuel,
            depth: 0,
        }
    }

    fn tick(&mut self, pos: Pos) -> Result<()> {
        if self.fuel == 0 {
            return Err(Diagnostic::at(
                codes::META_FUEL,
                pos,
                "generation-stage step budget exhausted (is a meta-level definition divergent?)",
            ));
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, env: &Env, e: &Expr) -> Result<MetaVal> {
        self.depth += 1;
        if self.depth > MAX_META_DEPTH {
            self.depth -= 1;
            return Err(Diagnostic::at(
                codes::META_FUEL,
                e.pos,
                "generation-stage recursion too deep",
            ));
        }
        let mut env = env.clone();
        let mut step = self.step(&env, e);
        loop {
            match step {
                Err(e) => {
                    self.depth -= 1;
                    return Err(e);
                }
                Ok(Step::Done(v)) => {
                    self.depth -= 1;
                    return Ok(v);
                }
                Ok(Step::Tail(env2, body)) => {
                    env = env2;
                    step = self.step(&env, &body);
                }
            }
        }
    }

    // One evaluation step; tail positions (applications, let bodies, taken
    // branches, definition references) return `Step::Tail` so recursive meta
    // programs run in constant native stack.
    fn step(&mut self, env: &Env, e: &Expr) -> Result<Step> {
        self.tick(e.pos)?;
        match &e.kind {
            ExprKind::Var(x) => {
                if let Some(v) = env.lookup(x) {
                    return Ok(Step::Done(v.clone()));
                }
                if let Some((_, body)) = self.def_bodies.iter().find(|(n, _)| n == x) {
                    return Ok(Step::Tail(Env::empty(), body.clone()));
                }
                Err(Diagnostic::at(
                    codes::UNBOUND_NAME,
                    e.pos,
                    format!("`{x}` is not bound at generation time"),
                ))
            }
            ExprKind::Int(v) => Ok(Step::Done(MetaVal::Int(*v))),
            ExprKind::Bool(v) => Ok(Step::Done(MetaVal::Bool(*v))),
            ExprKind::Float(_) => Err(Diagnostic::at(
                codes::TYPE_CLASH,
                e.pos,
                "float literals are run-time values; write them inside quotation brackets",
            )),
            ExprKind::Unit
            | ExprKind::Pair(_, _)
            | ExprKind::Fst(_)
            | ExprKind::Snd(_)
            | ExprKind::Inl(_)
            | ExprKind::Inr(_)
            | ExprKind::Case { .. } => Err(Diagnostic::at(
                codes::TYPE_CLASH,
                e.pos,
                "this form is only available inside quotation brackets",
            )),
            ExprKind::Lam(pats, body) => match pats.as_slice() {
                [Pat::Var(_, x)] => Ok(Step::Done(MetaVal::Closure {
                    env: env.clone(),
                    binder: x.clone(),
                    body: Rc::new((**body).clone()),
                })),
                _ => Err(Diagnostic::at(
                    codes::TYPE_CLASH,
                    e.pos,
                    "internal: lambda not reduced to a single binder",
                )),
            },
            ExprKind::App(f, a) => {
                let fv = self.eval(env, f)?;
                let av = self.eval(env, a)?;
                match fv {
                    MetaVal::Closure { env, binder, body } => {
                        Ok(Step::Tail(env.bind(binder, av), body))
                    }
                    other => Err(Diagnostic::at(
                        codes::TYPE_CLASH,
                        e.pos,
                        format!("cannot apply {}", other.describe()),
                    )),
                }
            }
            ExprKind::Bin(op, a, b) => {
                let av = self.eval(env, a)?;
                let bv = self.eval(env, b)?;
                self.binop(e.pos, *op, av, bv).map(Step::Done)
            }
            ExprKind::Builtin(b, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(env, a)?);
                }
                self.builtin(e.pos, *b, vals).map(Step::Done)
            }
            ExprKind::If(c, t, f) => match self.eval(env, c)? {
                MetaVal::Bool(true) => Ok(Step::Tail(env.clone(), Rc::new((**t).clone()))),
                MetaVal::Bool(false) => Ok(Step::Tail(env.clone(), Rc::new((**f).clone()))),
                other => Err(Diagnostic::at(
                    codes::TYPE_CLASH,
                    c.pos,
                    format!("if condition must be a boolean, got {}", other.describe()),
                )),
            },
            ExprKind::Let(x, rhs, body) => {
                let v = self.eval(env, rhs)?;
                Ok(Step::Tail(
                    env.bind(x.clone(), v),
                    Rc::new((**body).clone()),
                ))
            }
            ExprKind::Quote(body) => {
                let term = self.quote(env, body, &mut Vec::new())?;
                Ok(Step::Done(MetaVal::Quoted(term)))
            }
            ExprKind::Splice(_) => Err(Diagnostic::at(
                codes::SPLICE_OUTSIDE_QUOTE,
                e.pos,
                "splice outside quotation brackets",
            )),
            other => Err(Diagnostic::at(
                codes::TYPE_CLASH,
                e.pos,
                format!("internal: sugar survived to evaluation: {other:?}"),
            )),
        }
    }

    fn binop(&mut self, pos: Pos, op: BinOp, a: MetaVal, b: MetaVal) -> Result<MetaVal> {
        use MetaVal::*;
        let clash = |got: &MetaVal| {
            Err(Diagnostic::at(
                codes::TYPE_CLASH,
                pos,
                format!("`{}` expects integers at generation time, got {}", op.symbol(), got.describe()),
            ))
        };
        match (op, a, b) {
            (BinOp::Add, Int(x), Int(y)) => Ok(Int(x.wrapping_add(y))),
            (BinOp::Sub, Int(x), Int(y)) => Ok(Int(x.wrapping_sub(y))),
            (BinOp::Mul, Int(x), Int(y)) => Ok(Int(x.wrapping_mul(y))),
            (BinOp::Div, Int(_), Int(0)) => Err(Diagnostic::at(
                codes::TYPE_CLASH,
                pos,
                "division by zero at generation time",
            )),
            (BinOp::Div, Int(x), Int(y)) => Ok(Int(x / y)),
            (BinOp::Eq, Int(x), Int(y)) => Ok(Bool(x == y)),
            (BinOp::Ne, Int(x), Int(y)) => Ok(Bool(x != y)),
            (BinOp::Lt, Int(x), Int(y)) => Ok(Bool(x < y)),
            (BinOp::Le, Int(x), Int(y)) => Ok(Bool(x <= y)),
            (BinOp::Gt, Int(x), Int(y)) => Ok(Bool(x > y)),
            (BinOp::Ge, Int(x), Int(y)) => Ok(Bool(x >= y)),
            (BinOp::Eq, Bool(x), Bool(y)) => Ok(Bool(x == y)),
            (_, a @ Int(_), b) | (_, a, b @ Int(_)) => clash(if matches!(a, Int(_)) { &b } else { &a }),
            (_, a, _) => clash(&a),
        }
    }

    fn builtin(&mut self, pos: Pos, b: Builtin, vals: Vec<MetaVal>) -> Result<MetaVal> {
        let int_at = |i: usize| -> Result<i64> {
            match &vals[i] {
                MetaVal::Int(v) => Ok(*v),
                other => Err(Diagnostic::at(
                    codes::TYPE_CLASH,
                    pos,
                    format!("`{}` expects integers, got {}", b.name(), other.describe()),
                )),
            }
        };
        match b {
            Builtin::DivI => {
                let (x, y) = (int_at(0)?, int_at(1)?);
                if y == 0 {
                    return Err(Diagnostic::at(
                        codes::TYPE_CLASH,
                        pos,
                        "division by zero at generation time",
                    ));
                }
                Ok(MetaVal::Int(x.div_euclid(y)))
            }
            Builtin::ModI => {
                let (x, y) = (int_at(0)?, int_at(1)?);
                if y == 0 {
                    return Err(Diagnostic::at(
                        codes::TYPE_CLASH,
                        pos,
                        "division by zero at generation time",
                    ));
                }
                Ok(MetaVal::Int(x.rem_euclid(y)))
            }
            Builtin::Even => Ok(MetaVal::Bool(int_at(0)? % 2 == 0)),
            Builtin::Odd => Ok(MetaVal::Bool(int_at(0)? % 2 != 0)),
        }
    }

    /// Walks quoted object syntax, evaluating splices and grafting their
    /// terms. `bound` tracks object-level binders in scope.
    fn quote(&mut self, env: &Env, e: &Expr, bound: &mut Vec<String>) -> Result<ObjTerm> {
        self.tick(e.pos)?;
        Ok(match &e.kind {
            ExprKind::Var(x) => {
                if bound.iter().any(|b| b == x) || Const::by_name(x).is_some() {
                    ObjTerm::Var(x.clone())
                } else {
                    return Err(Diagnostic::at(
                        codes::UNBOUND_NAME,
                        e.pos,
                        format!(
                            "`{x}` is not bound inside this quotation; generation-stage values must be spliced with $$(...)"
                        ),
                    ));
                }
            }
            ExprKind::Int(v) => {
                let v = i32::try_from(*v).map_err(|_| {
                    Diagnostic::at(codes::LEX, e.pos, "integer literal out of 32-bit range")
                })?;
                ObjTerm::Lit(Lit::Int(v))
            }
            ExprKind::Float(v) => ObjTerm::Lit(Lit::Float(*v)),
            ExprKind::Bool(v) => ObjTerm::Lit(Lit::Bool(*v)),
            ExprKind::Unit => ObjTerm::Lit(Lit::Unit),
            ExprKind::Lam(pats, body) => match pats.as_slice() {
                [Pat::Var(_, x)] => {
                    bound.push(x.clone());
                    let b = self.quote(env, body, bound)?;
                    bound.pop();
                    ObjTerm::lam(x.clone(), b)
                }
                _ => {
                    return Err(Diagnostic::at(
                        codes::TYPE_CLASH,
                        e.pos,
                        "internal: lambda not reduced to a single binder",
                    ))
                }
            },
            ExprKind::App(f, a) => ObjTerm::app(
                self.quote(env, f, bound)?,
                self.quote(env, a, bound)?,
            ),
            ExprKind::Bin(op, a, b) => {
                let c = match op {
                    BinOp::Add => Const::Add,
                    BinOp::Sub => Const::Sub,
                    BinOp::Mul => Const::Mul,
                    BinOp::Div => Const::Div,
                    BinOp::Eq => Const::Eq,
                    BinOp::Lt => Const::Lt,
                    other => {
                        return Err(Diagnostic::at(
                            codes::TYPE_CLASH,
                            e.pos,
                            format!("`{}` is not an object-language operator", other.symbol()),
                        ))
                    }
                };
                ObjTerm::const_app(
                    c,
                    vec![self.quote(env, a, bound)?, self.quote(env, b, bound)?],
                )
            }
            ExprKind::Builtin(b, args) => match b {
                Builtin::DivI | Builtin::ModI => {
                    let c = if *b == Builtin::DivI {
                        Const::DivI
                    } else {
                        Const::ModI
                    };
                    ObjTerm::const_app(
                        c,
                        vec![
                            self.quote(env, &args[0], bound)?,
                            self.quote(env, &args[1], bound)?,
                        ],
                    )
                }
                Builtin::Even | Builtin::Odd => {
                    return Err(Diagnostic::at(
                        codes::TYPE_CLASH,
                        e.pos,
                        format!("`{}` is generation-stage only", b.name()),
                    ))
                }
            },
            ExprKind::If(c, t, f) => ObjTerm::if_(
                self.quote(env, c, bound)?,
                self.quote(env, t, bound)?,
                self.quote(env, f, bound)?,
            ),
            ExprKind::Let(x, rhs, body) => {
                let rhs = self.quote(env, rhs, bound)?;
                bound.push(x.clone());
                let body = self.quote(env, body, bound)?;
                bound.pop();
                ObjTerm::let_(x.clone(), rhs, body)
            }
            ExprKind::Pair(a, b) => ObjTerm::pair(
                self.quote(env, a, bound)?,
                self.quote(env, b, bound)?,
            ),
            ExprKind::Fst(a) => ObjTerm::fst(self.quote(env, a, bound)?),
            ExprKind::Snd(a) => ObjTerm::snd(self.quote(env, a, bound)?),
            ExprKind::Inl(a) => ObjTerm::inl(self.quote(env, a, bound)?, None),
            ExprKind::Inr(a) => ObjTerm::inr(self.quote(env, a, bound)?, None),
            ExprKind::Case {
                scrut,
                left_binder,
                left,
                right_binder,
                right,
            } => {
                let scrut = self.quote(env, scrut, bound)?;
                bound.push(left_binder.clone());
                let left = self.quote(env, left, bound)?;
                bound.pop();
                bound.push(right_binder.clone());
                let right = self.quote(env, right, bound)?;
                bound.pop();
                ObjTerm::Case {
                    scrut: Box::new(scrut),
                    left_binder: left_binder.clone(),
                    left_ty: None,
                    left: Box::new(left),
                    right_binder: right_binder.clone(),
                    right_ty: None,
                    right: Box::new(right),
                }
            }
            ExprKind::Quote(_) => {
                return Err(Diagnostic::at(
                    codes::PARSE,
                    e.pos,
                    "nested quotation is not supported",
                ))
            }
            ExprKind::Splice(inner) => {
                match self.eval(env, inner)? {
                    MetaVal::Quoted(t) => t,
                    other => {
                        return Err(Diagnostic::at(
                            codes::SPLICE_OF_NON_QUOTE,
                            e.pos,
                            format!("splice evaluated to {}, expected a quoted term", other.describe()),
                        ))
                    }
                }
            }
            other => {
                return Err(Diagnostic::at(
                    codes::TYPE_CLASH,
                    e.pos,
                    format!("internal: sugar survived to quotation: {other:?}"),
                ))
            }
        })
    }
}

/// Evaluates one expression from a module context.
pub fn eval_meta(defs: &SourceModule, e: &Expr, fuel: u64) -> Result<MetaVal> {
    Evaluator::new(defs, fuel).eval(&Env::empty(), e)
}

/// Evaluates the module's entry definition to a closed object term.
pub fn run_entry(m: &SourceModule, fuel: u64) -> Result<ObjTerm> {
    let entry = m.def(&m.entry).ok_or_else(|| {
        Diagnostic::new(
            codes::UNBOUND_NAME,
            format!("entry definition `{}` not found", m.entry),
        )
    })?;
    match eval_meta(m, &entry.body, fuel)? {
        MetaVal::Quoted(t) => {
            debug_assert!(
                crate::ast::free_vars(&t)
                    .iter()
                    .all(|v| Const::by_name(v).is_some()),
                "quoted entry has unexpected free variables"
            );
            Ok(t)
        }
        other => Err(Diagnostic::at(
            codes::ENTRY_NOT_QUOTED,
            entry.pos,
            format!(
                "entry `{}` evaluated to {}, expected a quoted term",
                m.entry,
                other.describe()
            ),
        )),
    }
}
