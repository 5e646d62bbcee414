//! Common subexpression elimination into let bindings.
//!
//! Within each straight-line region (a function body, a branch, or a loop
//! lambda body), repeated non-value subterms are bound once at the region
//! top, largest first, preserving first-occurrence order. Occurrences inside
//! branches or lambdas still count toward replacement once the binding is in
//! scope — the bound computation is evaluated on the straight-line path
//! either way — but only occurrences visible on the straight-line path make
//! a term a candidate, so nothing is ever evaluated speculatively.

use std::collections::HashMap;

use crate::ast::{free_vars, is_value, type_of_with, NameSupply, ObjTerm, ObjType, TypeEnv};

/// Alpha-insensitive key: binders renamed to traversal indices.
fn canon_key(t: &ObjTerm) -> String {
    fn canon(t: &ObjTerm, depth: &mut u32, map: &mut Vec<(String, String)>) -> ObjTerm {
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
                args: args.iter().map(|a| canon(a, depth, map)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                let fresh = format!("b{}", *depth);
                *depth += 1;
                map.push((binder.clone(), fresh.clone()));
                let body = canon(body, depth, map);
                map.pop();
                ObjTerm::Lam {
                    binder: fresh,
                    ty: ty.clone(),
                    body: Box::new(body),
                }
            }
            ObjTerm::App(f, a) => ObjTerm::app(canon(f, depth, map), canon(a, depth, map)),
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let rhs = canon(rhs, depth, map);
                let fresh = format!("b{}", *depth);
                *depth += 1;
                map.push((binder.clone(), fresh.clone()));
                let body = canon(body, depth, map);
                map.pop();
                ObjTerm::Let {
                    binder: fresh,
                    ty: ty.clone(),
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                }
            }
            ObjTerm::Pair(a, b) => ObjTerm::pair(canon(a, depth, map), canon(b, depth, map)),
            ObjTerm::Fst(p) => ObjTerm::fst(canon(p, depth, map)),
            ObjTerm::Snd(p) => ObjTerm::snd(canon(p, depth, map)),
            ObjTerm::Inl { payload, sum } => ObjTerm::inl(canon(payload, depth, map), sum.clone()),
            ObjTerm::Inr { payload, sum } => ObjTerm::inr(canon(payload, depth, map), sum.clone()),
            ObjTerm::Case {
                scrut,
                left_binder,
                left_ty,
                left,
                right_binder,
                right_ty,
                right,
            } => {
                let scrut = canon(scrut, depth, map);
                let lf = format!("b{}", *depth);
                *depth += 1;
                map.push((left_binder.clone(), lf.clone()));
                let left = canon(left, depth, map);
                map.pop();
                let rf = format!("b{}", *depth);
                *depth += 1;
                map.push((right_binder.clone(), rf.clone()));
                let right = canon(right, depth, map);
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
                canon(cond, depth, map),
                canon(then, depth, map),
                canon(els, depth, map),
            ),
        }
    }
    format!("{:?}", canon(t, &mut 0, &mut Vec::new()))
}

/// Counts candidate occurrences on the straight-line part of a region:
/// traversal stops at lambda bodies and at if/case branches (but descends
/// into scrutinees, conditions, let right-hand sides, and operands).
fn collect_straightline(t: &ObjTerm, out: &mut Vec<ObjTerm>) {
    if !is_value(t) && !matches!(t, ObjTerm::Let { .. }) {
        out.push(t.clone());
    }
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) | ObjTerm::Lam { .. } => {}
        ObjTerm::ConstApp { args, .. } => {
            for a in args {
                collect_straightline(a, out);
            }
        }
        ObjTerm::App(f, a) => {
            collect_straightline(f, out);
            collect_straightline(a, out);
        }
        ObjTerm::Let { rhs, body, .. } => {
            collect_straightline(rhs, out);
            collect_straightline(body, out);
        }
        ObjTerm::Pair(a, b) => {
            collect_straightline(a, out);
            collect_straightline(b, out);
        }
        ObjTerm::Fst(p) | ObjTerm::Snd(p) => collect_straightline(p, out),
        ObjTerm::Inl { payload, .. } | ObjTerm::Inr { payload, .. } => {
            collect_straightline(payload, out)
        }
        ObjTerm::Case { scrut, .. } => collect_straightline(scrut, out),
        ObjTerm::If { cond, .. } => collect_straightline(cond, out),
    }
}

/// Replaces every subterm alpha-equal to `needle` with `var`, everywhere in
/// the region (branches and lambda bodies included).
fn replace_all(t: &ObjTerm, needle_key: &str, var: &str) -> ObjTerm {
    if !is_value(t) && canon_key(t) == needle_key {
        return ObjTerm::var(var.to_string());
    }
    match t {
        ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
        ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
            c: *c,
            inst: inst.clone(),
            args: args.iter().map(|a| replace_all(a, needle_key, var)).collect(),
        },
        ObjTerm::Lam { binder, ty, body } => ObjTerm::Lam {
            binder: binder.clone(),
            ty: ty.clone(),
            body: Box::new(replace_all(body, needle_key, var)),
        },
        ObjTerm::App(f, a) => ObjTerm::app(
            replace_all(f, needle_key, var),
            replace_all(a, needle_key, var),
        ),
        ObjTerm::Let {
            binder,
            ty,
            rhs,
            body,
        } => ObjTerm::Let {
            binder: binder.clone(),
            ty: ty.clone(),
            rhs: Box::new(replace_all(rhs, needle_key, var)),
            body: Box::new(replace_all(body, needle_key, var)),
        },
        ObjTerm::Pair(a, b) => ObjTerm::pair(
            replace_all(a, needle_key, var),
            replace_all(b, needle_key, var),
        ),
        ObjTerm::Fst(p) => ObjTerm::fst(replace_all(p, needle_key, var)),
        ObjTerm::Snd(p) => ObjTerm::snd(replace_all(p, needle_key, var)),
        ObjTerm::Inl { payload, sum } => {
            ObjTerm::inl(replace_all(payload, needle_key, var), sum.clone())
        }
        ObjTerm::Inr { payload, sum } => {
            ObjTerm::inr(replace_all(payload, needle_key, var), sum.clone())
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
            scrut: Box::new(replace_all(scrut, needle_key, var)),
            left_binder: left_binder.clone(),
            left_ty: left_ty.clone(),
            left: Box::new(replace_all(left, needle_key, var)),
            right_binder: right_binder.clone(),
            right_ty: right_ty.clone(),
            right: Box::new(replace_all(right, needle_key, var)),
        },
        ObjTerm::If { cond, then, els } => ObjTerm::if_(
            replace_all(cond, needle_key, var),
            replace_all(then, needle_key, var),
            replace_all(els, needle_key, var),
        ),
    }
}

/// One region pass: bind the largest repeated non-value subterm whose free
/// variables are all in scope at the region root; iterate until none remains.
fn cse_region(
    t: &ObjTerm,
    env: &TypeEnv,
    locals: &[(String, ObjType)],
    supply: &mut NameSupply,
) -> ObjTerm {
    let in_scope: std::collections::BTreeSet<String> = locals
        .iter()
        .map(|(n, _)| n.clone())
        .chain(env.iter().map(|(n, _)| n.clone()))
        .collect();
    let mut current = t.clone();
    loop {
        let mut occurrences = Vec::new();
        collect_straightline(&current, &mut occurrences);
        let mut counts: HashMap<String, (usize, usize, usize, ObjTerm)> = HashMap::new();
        for (pos, occ) in occurrences.into_iter().enumerate() {
            if !free_vars(&occ).iter().all(|v| in_scope.contains(v)) {
                continue;
            }
            let key = canon_key(&occ);
            let e = counts.entry(key).or_insert((0, occ.size(), pos, occ));
            e.0 += 1;
        }
        let best = counts
            .into_iter()
            .filter(|(_, (count, _, _, _))| *count >= 2)
            .max_by(
                |(_, (_, s1, p1, _)), (_, (_, s2, p2, _))| s1.cmp(s2).then(p2.cmp(p1)),
            );
        match best {
            None => return current,
            Some((key, (_, _, _, repr))) => {
                let name = supply.fresh("w");
                let replaced = replace_all(&current, &key, &name);
                let ty = type_of_with(&repr, env, locals);
                current = ObjTerm::let_ty(name, ty, repr, replaced);
            }
        }
    }
}

/// Recursively applies region CSE: lambda bodies and branch arms form their
/// own regions, processed innermost first.
pub fn cse(t: &ObjTerm, env: &TypeEnv, supply: &mut NameSupply) -> ObjTerm {
    fn inner(
        t: &ObjTerm,
        env: &TypeEnv,
        locals: &mut Vec<(String, ObjType)>,
        supply: &mut NameSupply,
    ) -> ObjTerm {
        match t {
            ObjTerm::Var(_) | ObjTerm::Lit(_) => t.clone(),
            ObjTerm::ConstApp { c, inst, args } => ObjTerm::ConstApp {
                c: *c,
                inst: inst.clone(),
                args: args.iter().map(|a| inner(a, env, locals, supply)).collect(),
            },
            ObjTerm::Lam { binder, ty, body } => {
                locals.push((binder.clone(), ty.clone().expect("unannotated lambda")));
                let body = inner(body, env, locals, supply);
                let body = cse_region(&body, env, locals, supply);
                locals.pop();
                ObjTerm::Lam {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    body: Box::new(body),
                }
            }
            ObjTerm::App(f, a) => ObjTerm::app(
                inner(f, env, locals, supply),
                inner(a, env, locals, supply),
            ),
            ObjTerm::Let {
                binder,
                ty,
                rhs,
                body,
            } => {
                let rhs = inner(rhs, env, locals, supply);
                locals.push((binder.clone(), ty.clone().expect("unannotated let")));
                let body = inner(body, env, locals, supply);
                locals.pop();
                ObjTerm::Let {
                    binder: binder.clone(),
                    ty: ty.clone(),
                    rhs: Box::new(rhs),
                    body: Box::new(body),
                }
            }
            ObjTerm::Pair(a, b) => ObjTerm::pair(
                inner(a, env, locals, supply),
                inner(b, env, locals, supply),
            ),
            ObjTerm::Fst(p) => ObjTerm::fst(inner(p, env, locals, supply)),
            ObjTerm::Snd(p) => ObjTerm::snd(inner(p, env, locals, supply)),
            ObjTerm::Inl { payload, sum } => {
                ObjTerm::inl(inner(payload, env, locals, supply), sum.clone())
            }
            ObjTerm::Inr { payload, sum } => {
                ObjTerm::inr(inner(payload, env, locals, supply), sum.clone())
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
                let scrut = inner(scrut, env, locals, supply);
                locals.push((left_binder.clone(), left_ty.clone().expect("unannotated case")));
                let left = inner(left, env, locals, supply);
                let left = cse_region(&left, env, locals, supply);
                locals.pop();
                locals.push((
                    right_binder.clone(),
                    right_ty.clone().expect("unannotated case"),
                ));
                let right = inner(right, env, locals, supply);
                let right = cse_region(&right, env, locals, supply);
                locals.pop();
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
            ObjTerm::If { cond, then, els } => {
                let cond = inner(cond, env, locals, supply);
                let then = inner(then, env, locals, supply);
                let then = cse_region(&then, env, locals, supply);
                let els = inner(els, env, locals, supply);
                let els = cse_region(&els, env, locals, supply);
                ObjTerm::if_(cond, then, els)
            }
        }
    }
    let mut locals = Vec::new();
    let out = inner(t, env, &mut locals, supply);
    cse_region(&out, env, &locals, supply)
}
