//! The C backend: CSE into lets, renormalization, eta contraction for
//! conditionals and arrays, restricted linear inlining, then lowering and
//! text emission.

mod cir;
mod cse;
mod emit;
mod lower;
mod opt;

pub use cir::{CBinOp, CExpr, CFunction, CScalar, CStmt, CType, CUnit};
pub use cse::cse;
pub use emit::{emit, RUNTIME_HEADER};
pub use lower::lower;
pub use opt::{eta_contract, inline_linear};

use crate::ast::{NameSupply, ObjTerm};
use crate::diag::Result;
use crate::normalize::{phase1, phase2_with, LinearMode};
use crate::typecheck::TypedTerm;

pub struct BackendOutput {
    /// The term after CSE, renormalization, eta contraction, and linear
    /// inlining — what lowering actually sees.
    pub optimized: ObjTerm,
    pub unit: CUnit,
    pub c_source: String,
}

/// Applies the backend term passes.
pub fn optimize(t: &TypedTerm, supply: &mut NameSupply) -> Result<ObjTerm> {
    let shared = cse(&t.term, &t.env, supply);
    let mut fuel = crate::normalize::DEFAULT_NORM_FUEL;
    let (renorm, _) = phase1(&shared, &t.env, supply, &mut fuel)?;
    let (renorm, _) = phase2_with(&renorm, &t.env, supply, &mut fuel, LinearMode::PathRestricted)?;
    let contracted = eta_contract(&renorm);
    Ok(inline_linear(&contracted))
}

/// cse -> renormalize -> eta-contract -> inline -> lower -> emit.
pub fn backend_pipeline(
    t: &TypedTerm,
    entry_name: &str,
    supply: &mut NameSupply,
) -> Result<BackendOutput> {
    let optimized = optimize(t, supply)?;
    let unit = lower(&optimized, &t.env, entry_name)?;
    let c_source = emit(&unit);
    Ok(BackendOutput {
        optimized,
        unit,
        c_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{alpha_eq, ObjType};
    use crate::pipeline::typed_term_from_text;
    use crate::pretty::pretty_term;

    fn typed(src: &str, ty: &ObjType) -> TypedTerm {
        typed_term_from_text(src, Some(ty)).unwrap()
    }

    #[test]
    fn cse_rebinds_repeated_product() {
        // 1/((u*(v*v))*(u*(v*v)))  ~>  let w = u*(v*v) in 1/(w*w)
        let ff = ObjType::fun(
            ObjType::FLOAT,
            ObjType::fun(ObjType::FLOAT, ObjType::FLOAT),
        );
        let t = typed("\\u -> \\v -> 1.0 / ((u * (v * v)) * (u * (v * v)))", &ff);
        let mut supply = crate::ast::NameSupply::new();
        let shared = cse(&t.term, &t.env, &mut supply);
        let expected = typed(
            "\\u -> \\v -> let w = u * (v * v) in 1.0 / (w * w)",
            &ff,
        );
        assert!(
            alpha_eq(&shared, &expected.term),
            "got {}",
            pretty_term(&shared)
        );
    }

    #[test]
    fn cse_nested_duplicates_get_their_own_binding() {
        // The flattened sharing-lost shape: v = u*1 occurs four times,
        // w = u*(v*v) twice; both get bindings, largest first.
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let t = typed(
            "\\u -> 1.0 / ((u * ((u * 1.0) * (u * 1.0))) * (u * ((u * 1.0) * (u * 1.0))))",
            &ff,
        );
        let mut supply = crate::ast::NameSupply::new();
        let shared = cse(&t.term, &t.env, &mut supply);
        let expected = typed(
            "\\u -> let v = u * 1.0 in let w = u * (v * v) in 1.0 / (w * w)",
            &ff,
        );
        assert!(
            alpha_eq(&shared, &expected.term),
            "got {}",
            pretty_term(&shared)
        );
    }

    #[test]
    fn cse_leaves_single_occurrences_alone() {
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::fun(ObjType::FLOAT, ObjType::FLOAT));
        let t = typed("\\x -> \\y -> x + y", &ff);
        let mut supply = crate::ast::NameSupply::new();
        let shared = cse(&t.term, &t.env, &mut supply);
        assert!(alpha_eq(&shared, &t.term));
    }

    #[test]
    fn cse_on_branch_free_term_does_not_increase_work() {
        // Straight-line program: count interpreter constant evaluations by
        // comparing against the same term evaluated directly.
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let t = typed("\\u -> (u * (u + 1.0)) * (u * (u + 1.0))", &ff);
        let mut supply = crate::ast::NameSupply::new();
        let shared = cse(&t.term, &t.env, &mut supply);
        // One binding introduced, two uses; evaluation still agrees.
        let report = crate::verify::oracle_compare(
            &t.term,
            &shared,
            &ff,
            25,
            crate::verify::ORACLE_SEED,
            100_000,
        );
        assert!(report.ok());
        assert!(shared.size() < t.term.size());
    }

    #[test]
    fn eta_contracts_equal_branches() {
        let ff = ObjType::fun(ObjType::BOOL, ObjType::fun(ObjType::FLOAT, ObjType::FLOAT));
        let t = typed("\\c -> \\x -> if c then x + 1.0 else x + 1.0", &ff);
        let out = eta_contract(&t.term);
        let expected = typed("\\c -> \\x -> x + 1.0", &ff);
        assert!(alpha_eq(&out, &expected.term), "got {}", pretty_term(&out));
        // Different branches stay.
        let t = typed("\\c -> \\x -> if c then x else 0.0", &ff);
        assert!(alpha_eq(&eta_contract(&t.term), &t.term));
    }

    #[test]
    fn eta_contracts_array_identity() {
        let ty = ObjType::fun(ObjType::array(ObjType::FLOAT), ObjType::array(ObjType::FLOAT));
        let t = typed("\\a -> mkArr (lnArr a) (\\i -> ixArr a i)", &ty);
        let out = eta_contract(&t.term);
        let expected = typed("\\a -> a", &ty);
        assert!(alpha_eq(&out, &expected.term), "got {}", pretty_term(&out));
        // Index function over a different array is not an identity.
        let ty2 = ObjType::fun(
            ObjType::array(ObjType::FLOAT),
            ObjType::fun(ObjType::array(ObjType::FLOAT), ObjType::array(ObjType::FLOAT)),
        );
        let t = typed("\\a -> \\b -> mkArr (lnArr a) (\\i -> ixArr b i)", &ty2);
        assert!(alpha_eq(&eta_contract(&t.term), &t.term));
    }

    #[test]
    fn inline_linear_basic_shapes() {
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::fun(ObjType::FLOAT, ObjType::FLOAT));
        // let x = a+b in x*2.0  ~>  (a+b)*2.0
        let t = typed("\\a -> \\b -> let x = a + b in x * 2.0", &ff);
        let out = inline_linear(&t.term);
        let expected = typed("\\a -> \\b -> (a + b) * 2.0", &ff);
        assert!(alpha_eq(&out, &expected.term), "got {}", pretty_term(&out));

        // Occurrence under a branch is not inlined.
        let ty = ObjType::fun(
            ObjType::BOOL,
            ObjType::fun(ObjType::FLOAT, ObjType::fun(ObjType::FLOAT, ObjType::FLOAT)),
        );
        let t = typed(
            "\\c -> \\a -> \\b -> let x = a + b in if c then x else 0.0",
            &ty,
        );
        assert!(alpha_eq(&inline_linear(&t.term), &t.term));

        // Two occurrences are not inlined.
        let t = typed("\\a -> \\b -> let x = a + b in x * x", &ff);
        assert!(alpha_eq(&inline_linear(&t.term), &t.term));
    }

    #[test]
    fn inline_linear_does_not_skip_bindings() {
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        // x's only use lies in the body of y's binding, and y itself cannot
        // be inlined (two uses); x would have to skip over it, so both stay.
        let t = typed(
            "\\a -> let x = a + 1.0 in let y = a * 2.0 in (y * y) * x",
            &ff,
        );
        let out = inline_linear(&t.term);
        assert!(alpha_eq(&out, &t.term), "got {}", pretty_term(&out));
        // When the intervening binding goes away, the cascade is fine: each
        // step preserves the order of the bindings that remain.
        let t = typed(
            "\\a -> let x = a + 1.0 in let y = a * 2.0 in y * x",
            &ff,
        );
        let out = inline_linear(&t.term);
        let expected = typed("\\a -> (a * 2.0) * (a + 1.0)", &ff);
        assert!(alpha_eq(&out, &expected.term), "got {}", pretty_term(&out));
    }

    #[test]
    fn binding_order_preserved_by_inline() {
        // The non-value right-hand sides that remain keep their textual
        // order after inlining.
        fn rhs_sequence(t: &crate::ast::ObjTerm) -> Vec<String> {
            let mut out = Vec::new();
            t.walk(&mut |s| {
                if let crate::ast::ObjTerm::Let { rhs, .. } = s {
                    if !crate::ast::is_value(rhs) {
                        out.push(pretty_term(rhs));
                    }
                }
            });
            out
        }
        let ff = ObjType::fun(ObjType::FLOAT, ObjType::FLOAT);
        let t = typed(
            "\\a -> let x = a + 1.0 in let y = a * 2.0 in let z = y - x in z * z",
            &ff,
        );
        let before = rhs_sequence(&t.term);
        let out = inline_linear(&t.term);
        let after = rhs_sequence(&out);
        let filtered: Vec<String> = before
            .into_iter()
            .filter(|r| after.contains(r) || after.iter().any(|a| a.contains(r.as_str())))
            .collect();
        assert!(filtered.len() >= after.len());
    }

    #[test]
    fn backend_pipeline_is_a_fixed_point_on_its_output() {
        let src = "main :: Arr Float -> Float\nmain = [|| \\a -> $$normVec ($$toVec a) ||]\n";
        let mut p = crate::pipeline::front(src, crate::pipeline::Options::default()).unwrap();
        let (nf, _) = p.normalize().unwrap();
        let once = optimize(&nf, &mut p.supply).unwrap();
        let once_typed = TypedTerm {
            term: once.clone(),
            top: nf.top.clone(),
            env: nf.env.clone(),
        };
        let twice = optimize(&once_typed, &mut p.supply).unwrap();
        assert!(
            alpha_eq(&once, &twice),
            "once: {}\ntwice: {}",
            pretty_term(&once),
            pretty_term(&twice)
        );
    }
}
