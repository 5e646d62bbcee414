//! Lowering first-order normal forms to the C IR.
//!
//! The top-level lambda spine becomes parameters; lets become declarations
//! plus assignments; a tail-position conditional becomes an if/else block
//! assigning the result variables, while an operand-position conditional
//! becomes a ternary; `while` becomes flattened state variables and a loop;
//! `mkArr` becomes an allocation and a fill loop; `save` compiles to its
//! argument. Pairs are flattened to one scalar variable per leaf with
//! `_1`/`_2` suffixes; the function result accumulates in `r` and is
//! returned once.

use crate::ast::{type_of_with, Base, Lit, ObjTerm, ObjType, TypeEnv};
use crate::consts::Const;
use crate::diag::{codes, Diagnostic, Result};

use super::cir::{CBinOp, CExpr, CFunction, CScalar, CStmt, CType, CUnit};

fn scalar_of(b: Base) -> CScalar {
    match b {
        Base::Bool => CScalar::Bool,
        Base::Int => CScalar::Int32,
        Base::Float => CScalar::Float,
        Base::Unit => CScalar::Int32,
    }
}

/// Flattens a representable type into leaf C types with name suffixes.
/// Unit components vanish.
fn leaves_of(ty: &ObjType, suffix: &str, out: &mut Vec<(CType, String)>) -> Result<()> {
    match ty {
        ObjType::Base(Base::Unit) => Ok(()),
        ObjType::Base(b) => {
            out.push((CType::Scalar(scalar_of(*b)), suffix.to_string()));
            Ok(())
        }
        ObjType::Prod(a, b) => {
            leaves_of(a, &format!("{suffix}_1"), out)?;
            leaves_of(b, &format!("{suffix}_2"), out)
        }
        ObjType::Array(e) => match e.as_ref() {
            ObjType::Base(b) if *b != Base::Unit => {
                out.push((CType::Arr(scalar_of(*b)), suffix.to_string()));
                Ok(())
            }
            other => Err(Diagnostic::new(
                codes::LOWERING,
                format!(
                    "array element type {} is not supported by the C backend",
                    crate::pretty::pretty_type(other)
                ),
            )),
        },
        other => Err(Diagnostic::new(
            codes::LOWERING,
            format!(
                "type {} is not representable in C",
                crate::pretty::pretty_type(other)
            ),
        )),
    }
}

fn type_leaves(ty: &ObjType) -> Result<Vec<(CType, String)>> {
    let mut out = Vec::new();
    leaves_of(ty, "", &mut out)?;
    Ok(out)
}

struct Lower<'a> {
    env: &'a TypeEnv,
    /// Object binder types in scope (for `type_of_with`).
    locals: Vec<(String, ObjType)>,
    /// Object variable -> leaf expressions.
    slots: Vec<(String, Vec<CExpr>)>,
    decls: Vec<(CType, String)>,
    used_names: std::collections::HashSet<String>,
}

impl<'a> Lower<'a> {
    fn ty(&self, t: &ObjTerm) -> ObjType {
        type_of_with(t, self.env, &self.locals)
    }

    fn fresh(&mut self, hint: &str) -> String {
        // Sanitize supply-generated names like `v%3` into C identifiers.
        let base: String = hint
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        let base = if base.is_empty() || base.as_bytes()[0].is_ascii_digit() {
            format!("v{base}")
        } else {
            base
        };
        let mut name = base.clone();
        let mut i = 0;
        while !self.used_names.insert(name.clone()) {
            name = format!("{base}{i}");
            i += 1;
        }
        name
    }

    fn declare(&mut self, ty: &ObjType, hint: &str) -> Result<Vec<(CType, String)>> {
        let leaves = type_leaves(ty)?;
        let mut out = Vec::new();
        for (cty, suffix) in leaves {
            let name = self.fresh(&format!("{hint}{suffix}"));
            self.decls.push((cty, name.clone()));
            out.push((cty, name));
        }
        Ok(out)
    }

    fn lookup(&self, x: &str) -> Result<Vec<CExpr>> {
        self.slots
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| {
                Diagnostic::new(codes::LOWERING, format!("unbound variable `{x}` in lowering"))
            })
    }

    fn err_unsupported(&self, t: &ObjTerm, what: &str) -> Diagnostic {
        Diagnostic::new(
            codes::NOT_FIRST_ORDER,
            format!(
                "{what} cannot be lowered to C: {}",
                crate::pretty::pretty_term(t)
            ),
        )
    }

    /// Lowers `t` to one expression per leaf of its type, emitting prelude
    /// statements into `out`.
    fn expr(&mut self, t: &ObjTerm, out: &mut Vec<CStmt>) -> Result<Vec<CExpr>> {
        match t {
            ObjTerm::Var(x) => self.lookup(x),
            ObjTerm::Lit(Lit::Unit) => Ok(vec![]),
            ObjTerm::Lit(Lit::Int(v)) => Ok(vec![CExpr::Int(*v)]),
            ObjTerm::Lit(Lit::Float(v)) => Ok(vec![CExpr::Float(*v)]),
            ObjTerm::Lit(Lit::Bool(v)) => Ok(vec![CExpr::Bool(*v)]),
            ObjTerm::Pair(a, b) => {
                let mut s = self.expr(a, out)?;
                s.extend(self.expr(b, out)?);
                Ok(s)
            }
            ObjTerm::Fst(p) => {
                let pt = self.ty(p);
                let (l, _r) = match &pt {
                    ObjType::Prod(l, r) => (l.clone(), r.clone()),
                    other => {
                        return Err(Diagnostic::new(
                            codes::LOWERING,
                            format!("fst of non-pair type {}", crate::pretty::pretty_type(other)),
                        ))
                    }
                };
                let slots = self.expr(p, out)?;
                let keep = type_leaves(&l)?.len();
                Ok(slots[..keep].to_vec())
            }
            ObjTerm::Snd(p) => {
                let pt = self.ty(p);
                let (l, _r) = match &pt {
                    ObjType::Prod(l, r) => (l.clone(), r.clone()),
                    other => {
                        return Err(Diagnostic::new(
                            codes::LOWERING,
                            format!("snd of non-pair type {}", crate::pretty::pretty_type(other)),
                        ))
                    }
                };
                let slots = self.expr(p, out)?;
                let skip = type_leaves(&l)?.len();
                Ok(slots[skip..].to_vec())
            }
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let bty = ty.clone().expect("unannotated let");
                let rhs_slots = self.expr(rhs, out)?;
                let vars = self.declare(&bty, binder)?;
                debug_assert_eq!(vars.len(), rhs_slots.len());
                for ((_, name), e) in vars.iter().zip(rhs_slots) {
                    out.push(CStmt::Assign(name.clone(), e));
                }
                let slots: Vec<CExpr> =
                    vars.iter().map(|(_, n)| CExpr::Var(n.clone())).collect();
                self.slots.push((binder.clone(), slots));
                self.locals.push((binder.clone(), bty));
                let r = self.expr(body, out);
                self.locals.pop();
                self.slots.pop();
                r
            }
            ObjTerm::If { cond, then, els } => {
                let cond_e = self.scalar_expr(cond, out)?;
                // Try a pure lowering of both branches first.
                let mut then_stmts = Vec::new();
                let mut else_stmts = Vec::new();
                let then_slots = self.expr(then, &mut then_stmts)?;
                let else_slots = self.expr(els, &mut else_stmts)?;
                if then_stmts.is_empty() && else_stmts.is_empty() {
                    Ok(then_slots
                        .into_iter()
                        .zip(else_slots)
                        .map(|(t, e)| {
                            CExpr::Ternary(Box::new(cond_e.clone()), Box::new(t), Box::new(e))
                        })
                        .collect())
                } else {
                    let ty = self.ty(then);
                    let vars = self.declare(&ty, "t")?;
                    for ((_, name), e) in vars.iter().zip(then_slots) {
                        then_stmts.push(CStmt::Assign(name.clone(), e));
                    }
                    for ((_, name), e) in vars.iter().zip(else_slots) {
                        else_stmts.push(CStmt::Assign(name.clone(), e));
                    }
                    out.push(CStmt::If {
                        cond: cond_e,
                        then: then_stmts,
                        els: else_stmts,
                    });
                    Ok(vars.iter().map(|(_, n)| CExpr::Var(n.clone())).collect())
                }
            }
            ObjTerm::ConstApp { c, args, .. } => self.constant(t, *c, args, out),
            ObjTerm::Lam { .. } => Err(self.err_unsupported(t, "a lambda outside a constant")),
            ObjTerm::App(_, _) => Err(self.err_unsupported(t, "a residual application")),
            ObjTerm::Inl { .. } | ObjTerm::Inr { .. } | ObjTerm::Case { .. } => {
                Err(self.err_unsupported(t, "a sum-typed construct"))
            }
        }
    }

    /// Lowers a term expected to produce exactly one leaf.
    fn scalar_expr(&mut self, t: &ObjTerm, out: &mut Vec<CStmt>) -> Result<CExpr> {
        let mut slots = self.expr(t, out)?;
        if slots.len() != 1 {
            return Err(Diagnostic::new(
                codes::LOWERING,
                format!("expected a scalar, got {} leaves", slots.len()),
            ));
        }
        Ok(slots.remove(0))
    }

    fn constant(
        &mut self,
        whole: &ObjTerm,
        c: Const,
        args: &[ObjTerm],
        out: &mut Vec<CStmt>,
    ) -> Result<Vec<CExpr>> {
        match c {
            Const::Add | Const::Sub | Const::Mul | Const::Div | Const::Eq | Const::Lt => {
                let a = self.scalar_expr(&args[0], out)?;
                let b = self.scalar_expr(&args[1], out)?;
                let op = match c {
                    Const::Add => CBinOp::Add,
                    Const::Sub => CBinOp::Sub,
                    Const::Mul => CBinOp::Mul,
                    Const::Div => CBinOp::Div,
                    Const::Eq => CBinOp::Eq,
                    Const::Lt => CBinOp::Lt,
                    _ => unreachable!(),
                };
                Ok(vec![CExpr::Bin(op, Box::new(a), Box::new(b))])
            }
            Const::DivI | Const::ModI => {
                let a = self.scalar_expr(&args[0], out)?;
                let b = self.scalar_expr(&args[1], out)?;
                // C99 division truncates toward zero.
                let op = if c == Const::DivI {
                    CBinOp::Div
                } else {
                    CBinOp::Mod
                };
                Ok(vec![CExpr::Bin(op, Box::new(a), Box::new(b))])
            }
            Const::Sqrt => {
                let a = self.scalar_expr(&args[0], out)?;
                Ok(vec![CExpr::Sqrtf(Box::new(a))])
            }
            Const::Save => self.expr(&args[0], out),
            Const::While => self.lower_while(args, out),
            Const::MkArr => self.lower_mkarr(whole, args, out),
            Const::LnArr => {
                let a = self.scalar_expr(&args[0], out)?;
                Ok(vec![CExpr::LenOf(Box::new(a))])
            }
            Const::IxArr => {
                let elem = match self.ty(whole) {
                    ObjType::Base(b) if b != Base::Unit => scalar_of(b),
                    other => {
                        return Err(Diagnostic::new(
                            codes::LOWERING,
                            format!(
                                "array element type {} is not supported by the C backend",
                                crate::pretty::pretty_type(&other)
                            ),
                        ))
                    }
                };
                let a = self.scalar_expr(&args[0], out)?;
                let i = self.scalar_expr(&args[1], out)?;
                Ok(vec![CExpr::Index(elem, Box::new(a), Box::new(i))])
            }
            Const::Fix => Err(Diagnostic::new(
                codes::FORBIDDEN_CONSTANT,
                "`fix` cannot be compiled to C",
            )),
        }
    }

    // while c b s0: flatten the state into variables, inline the predicate
    // and step lambdas over those variables, and re-assign through temps so
    // the update is simultaneous.
    fn lower_while(&mut self, args: &[ObjTerm], out: &mut Vec<CStmt>) -> Result<Vec<CExpr>> {
        let state_ty = self.ty(&args[2]);
        let init = self.expr(&args[2], out)?;
        let state_vars = self.declare(&state_ty, "s")?;
        for ((_, name), e) in state_vars.iter().zip(init) {
            out.push(CStmt::Assign(name.clone(), e));
        }
        let state_slots: Vec<CExpr> = state_vars
            .iter()
            .map(|(_, n)| CExpr::Var(n.clone()))
            .collect();

        let (pred_binder, pred_body) = lambda_parts(&args[0])?;
        let (step_binder, step_body) = lambda_parts(&args[1])?;

        // Predicate.
        let mut pre = Vec::new();
        self.slots.push((pred_binder.to_string(), state_slots.clone()));
        self.locals.push((pred_binder.to_string(), state_ty.clone()));
        let cond = self.scalar_expr(pred_body, &mut pre)?;
        self.locals.pop();
        self.slots.pop();

        // Step body, assigned through temporaries.
        let mut body = Vec::new();
        self.slots.push((step_binder.to_string(), state_slots.clone()));
        self.locals.push((step_binder.to_string(), state_ty.clone()));
        let next = self.expr(step_body, &mut body)?;
        self.locals.pop();
        self.slots.pop();
        let temps = self.declare(&state_ty, "n")?;
        for ((_, tmp), e) in temps.iter().zip(next) {
            body.push(CStmt::Assign(tmp.clone(), e));
        }
        for ((_, sv), (_, tmp)) in state_vars.iter().zip(&temps) {
            body.push(CStmt::Assign(sv.clone(), CExpr::Var(tmp.clone())));
        }

        if pre.is_empty() {
            out.push(CStmt::While { cond, body });
        } else {
            out.push(CStmt::Loop { pre, cond, body });
        }
        Ok(state_slots)
    }

    // mkArr n (\i -> e): allocate, then fill.
    fn lower_mkarr(
        &mut self,
        whole: &ObjTerm,
        args: &[ObjTerm],
        out: &mut Vec<CStmt>,
    ) -> Result<Vec<CExpr>> {
        let elem = match self.ty(whole) {
            ObjType::Array(e) => match *e {
                ObjType::Base(b) if b != Base::Unit => scalar_of(b),
                other => {
                    return Err(Diagnostic::new(
                        codes::LOWERING,
                        format!(
                            "array element type {} is not supported by the C backend",
                            crate::pretty::pretty_type(&other)
                        ),
                    ))
                }
            },
            other => {
                return Err(Diagnostic::new(
                    codes::LOWERING,
                    format!("mkArr produced {}", crate::pretty::pretty_type(&other)),
                ))
            }
        };
        let n = self.scalar_expr(&args[0], out)?;
        let arr = self.fresh("a");
        self.decls.push((CType::Arr(elem), arr.clone()));
        out.push(CStmt::AllocArr(arr.clone(), elem, n));

        let (ix_binder, ix_body) = lambda_parts(&args[1])?;
        let i = self.fresh("i");
        self.decls.push((CType::Scalar(CScalar::Int32), i.clone()));
        let mut fill = Vec::new();
        self.slots
            .push((ix_binder.to_string(), vec![CExpr::Var(i.clone())]));
        self.locals.push((ix_binder.to_string(), ObjType::INT));
        let e = self.scalar_expr(ix_body, &mut fill)?;
        self.locals.pop();
        self.slots.pop();
        fill.push(CStmt::StoreArr(arr.clone(), CExpr::Var(i.clone()), e));
        out.push(CStmt::For {
            var: i,
            bound: CExpr::LenOf(Box::new(CExpr::Var(arr.clone()))),
            body: fill,
        });
        Ok(vec![CExpr::Var(arr)])
    }

    /// Tail lowering: assigns the value of `t` into `targets`, pushing the
    /// conditional structure down so result variables are assigned in each
    /// branch, as in a single-result-variable function body.
    fn tail(&mut self, t: &ObjTerm, targets: &[String], out: &mut Vec<CStmt>) -> Result<()> {
        match t {
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let bty = ty.clone().expect("unannotated let");
                let rhs_slots = self.expr(rhs, out)?;
                let vars = self.declare(&bty, binder)?;
                for ((_, name), e) in vars.iter().zip(rhs_slots) {
                    out.push(CStmt::Assign(name.clone(), e));
                }
                let slots: Vec<CExpr> =
                    vars.iter().map(|(_, n)| CExpr::Var(n.clone())).collect();
                self.slots.push((binder.clone(), slots));
                self.locals.push((binder.clone(), bty));
                let r = self.tail(body, targets, out);
                self.locals.pop();
                self.slots.pop();
                r
            }
            ObjTerm::If { cond, then, els } => {
                let cond_e = self.scalar_expr(cond, out)?;
                let mut then_stmts = Vec::new();
                self.tail(then, targets, &mut then_stmts)?;
                let mut else_stmts = Vec::new();
                self.tail(els, targets, &mut else_stmts)?;
                out.push(CStmt::If {
                    cond: cond_e,
                    then: then_stmts,
                    els: else_stmts,
                });
                Ok(())
            }
            _ => {
                let slots = self.expr(t, out)?;
                debug_assert_eq!(slots.len(), targets.len());
                for (target, e) in targets.iter().zip(slots) {
                    out.push(CStmt::Assign(target.clone(), e));
                }
                Ok(())
            }
        }
    }
}

fn lambda_parts(t: &ObjTerm) -> Result<(&str, &ObjTerm)> {
    match t {
        ObjTerm::Lam { binder, body, .. } => Ok((binder, body)),
        other => Err(Diagnostic::new(
            codes::NOT_FIRST_ORDER,
            format!(
                "expected a lambda argument, found {}",
                crate::pretty::pretty_term(other)
            ),
        )),
    }
}

/// Lowers a first-order normal form of signature `A1 -> ... -> An -> B` to a
/// C function named `entry_name`.
pub fn lower(t: &ObjTerm, env: &TypeEnv, entry_name: &str) -> Result<CUnit> {
    let mut lower = Lower {
        env,
        locals: Vec::new(),
        slots: Vec::new(),
        decls: Vec::new(),
        used_names: std::collections::HashSet::new(),
    };
    lower.used_names.insert(entry_name.to_string());

    // Peel the parameter spine.
    let mut params: Vec<(CType, String)> = Vec::new();
    let mut body = t;
    while let ObjTerm::Lam {
        binder,
        ty,
        body: inner,
    } = body
    {
        let bty = ty.clone().expect("unannotated lambda");
        let leaves = type_leaves(&bty)?;
        let mut slots = Vec::new();
        for (cty, suffix) in leaves {
            let name = lower.fresh(&format!("{binder}{suffix}"));
            params.push((cty, name.clone()));
            slots.push(CExpr::Var(name));
        }
        lower.slots.push((binder.clone(), slots));
        lower.locals.push((binder.clone(), bty));
        body = inner;
    }

    let result_ty = type_of_with(body, env, &lower.locals);
    let result_leaves = type_leaves(&result_ty)?;
    if result_leaves.is_empty() {
        return Err(Diagnostic::new(
            codes::LOWERING,
            "the C backend cannot return a unit-only value",
        ));
    }
    let mut result = Vec::new();
    for (cty, suffix) in &result_leaves {
        let name = lower.fresh(&format!("r{suffix}"));
        lower.decls.push((*cty, name.clone()));
        result.push((*cty, name));
    }
    let targets: Vec<String> = result.iter().map(|(_, n)| n.clone()).collect();
    let mut stmts = Vec::new();
    lower.tail(body, &targets, &mut stmts)?;

    Ok(CUnit {
        includes: vec!["qf_runtime.h".to_string()],
        function: CFunction {
            name: entry_name.to_string(),
            params,
            decls: lower.decls,
            body: stmts,
            result,
        },
    })
}
