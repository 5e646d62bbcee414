//! Pipeline orchestration: parse, desugar, run the generation stage,
//! saturate constants, reconstruct types, normalize. The C backend hangs off
//! the normalized term. One [`Pipeline`] owns one fresh-name supply.

use crate::ast::{is_representable, NameSupply, ObjTerm, ObjType, TypeEnv};
use crate::desugar::desugar_module;
use crate::diag::{codes, Diagnostic, Result};
use crate::normalize::{self, NormStats, Strategy};
use crate::parser::parse_module;
use crate::stage0;
use crate::surface::SourceModule;
use crate::typecheck::{infer, TypedTerm};

/// Prelude source compiled with every module.
pub const PRELUDE: &str = include_str!("prelude.qf");

#[derive(Clone, Debug)]
pub struct Options {
    pub entry: String,
    pub routine: String,
    pub strategy: Strategy,
    pub meta_fuel: u64,
    pub norm_fuel: u64,
    pub interp_fuel: u64,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            entry: "main".to_string(),
            routine: "prog".to_string(),
            strategy: Strategy::Need,
            meta_fuel: stage0::DEFAULT_META_FUEL,
            norm_fuel: normalize::DEFAULT_NORM_FUEL,
            interp_fuel: crate::verify::DEFAULT_INTERP_FUEL,
        }
    }
}

/// The pipeline state after the generation stage and type reconstruction.
pub struct Pipeline {
    pub options: Options,
    pub module: SourceModule,
    /// The entry's object term, saturated and type-annotated.
    pub typed: TypedTerm,
    /// Entry term before type reconstruction (phase-0 dump).
    pub raw: ObjTerm,
    pub supply: NameSupply,
}

/// Parses and desugars a module, appending prelude definitions the user has
/// not shadowed.
pub fn load_module(source: &str, entry: &str) -> Result<SourceModule> {
    let mut module = parse_module(source)?;
    let prelude = parse_module(PRELUDE).expect("prelude parses");
    for def in prelude.defs {
        if module.def(&def.name).is_none() {
            module.defs.push(def);
        }
    }
    module.entry = entry.to_string();
    desugar_module(&module)
}

/// Runs the front half: generation stage, constant saturation, type
/// reconstruction against the entry's ascription.
pub fn front(source: &str, options: Options) -> Result<Pipeline> {
    let module = load_module(source, &options.entry)?;
    let entry_def = module.def(&module.entry).ok_or_else(|| {
        Diagnostic::new(
            codes::UNBOUND_NAME,
            format!("entry definition `{}` not found", module.entry),
        )
    })?;
    let ascription = entry_def
        .ascription
        .as_ref()
        .map(|t| t.to_obj())
        .ok_or_else(|| {
            Diagnostic::at(
                codes::ENTRY_SIGNATURE,
                entry_def.pos,
                format!(
                    "entry `{}` needs a type signature (e.g. `{} :: Float -> Float`)",
                    module.entry, module.entry
                ),
            )
        })?;
    let entry_pos = entry_def.pos;
    let term = stage0::run_entry(&module, options.meta_fuel)?;
    let mut supply = NameSupply::new();
    let saturated = normalize::preprocess(&term, &mut supply);
    // Object terms carry no spans once quotations are grafted together, so
    // reconstruction diagnostics anchor at the entry definition.
    let typed = infer(&saturated, &TypeEnv::new(), Some(&ascription), &mut supply)
        .map_err(|d| match d.pos {
            Some(_) => d,
            None => Diagnostic::at(d.code, entry_pos, d.message),
        })?;
    Ok(Pipeline {
        options,
        module,
        raw: saturated,
        typed,
        supply,
    })
}

impl Pipeline {
    /// Normalizes the entry term under the configured strategy.
    pub fn normalize(&mut self) -> Result<(TypedTerm, NormStats)> {
        let (term, stats) = normalize::normalize(
            &self.typed.term,
            &self.typed.env,
            self.options.strategy,
            self.options.norm_fuel,
            &mut self.supply,
        )?;
        Ok((
            TypedTerm {
                term,
                top: self.typed.top.clone(),
                env: self.typed.env.clone(),
            },
            stats,
        ))
    }

    /// Checks that the ascribed entry type is a first-order signature
    /// `A1 -> ... -> An -> B` with every `Ai` and `B` representable.
    pub fn check_entry_signature(&self) -> Result<()> {
        let (args, result) = self.typed.top.uncurry();
        for ty in args.iter().chain(std::iter::once(&result)) {
            if !is_representable(ty) {
                return Err(Diagnostic::new(
                    codes::ENTRY_SIGNATURE,
                    format!(
                        "entry type {} is not a first-order signature: {} is not representable",
                        crate::pretty::pretty_type(&self.typed.top),
                        crate::pretty::pretty_type(ty)
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Everything `compile` produces.
pub struct CompileOutput {
    /// The normalized entry term.
    pub normal: TypedTerm,
    pub stats: NormStats,
    /// The term after the backend passes, as lowered.
    pub optimized: ObjTerm,
    pub c_source: String,
}

/// Full compilation: normalize, gate on the first-order and permitted
/// checks, then run the backend. No C is produced for a failing program.
pub fn compile(source: &str, options: Options) -> Result<CompileOutput> {
    let mut p = front(source, options)?;
    p.check_entry_signature()?;
    let (normal, stats) = p.normalize()?;
    let violations = crate::typecheck::check_permitted(&normal.term);
    if !violations.is_empty() {
        let names: Vec<&str> = violations.iter().map(|v| v.constant).collect();
        return Err(Diagnostic::new(
            codes::FORBIDDEN_CONSTANT,
            format!("program uses constants not permitted in C: {}", names.join(", ")),
        ));
    }
    let fo = crate::verify::check_first_order(&normal);
    if !fo.ok() {
        let mut msg = String::from("normal form is not first-order:");
        for w in &fo.witnesses {
            msg.push_str(&format!("
  {w}"));
        }
        return Err(Diagnostic::new(codes::NOT_FIRST_ORDER, msg));
    }
    let routine = p.options.routine.clone();
    let out = crate::backend::backend_pipeline(&normal, &routine, &mut p.supply)?;
    Ok(CompileOutput {
        normal,
        stats,
        optimized: out.optimized,
        c_source: out.c_source,
    })
}

/// Parses a bare term in the canonical grammar and reconstructs its type;
/// used by golden tests and oracles. The text may not contain splices.
pub fn typed_term_from_text(text: &str, expected: Option<&ObjType>) -> Result<TypedTerm> {
    let expr = crate::parser::parse_expr(text)?;
    let desugared = crate::desugar::desugar_bare(&expr)?;
    let module = SourceModule {
        defs: Vec::new(),
        entry: String::new(),
    };
    let quoted = crate::surface::Expr::new(
        expr.pos,
        crate::surface::ExprKind::Quote(Box::new(desugared)),
    );
    let term = match stage0::eval_meta(&module, &quoted, 1_000_000)? {
        stage0::MetaVal::Quoted(t) => t,
        _ => unreachable!("quote evaluates to a quoted term"),
    };
    let mut supply = NameSupply::new();
    let saturated = normalize::preprocess(&term, &mut supply);
    infer(&saturated, &TypeEnv::new(), expected, &mut supply)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::alpha_eq;

    #[test]
    fn composition_entry_matches_explicit_application() {
        // The entry written as a composition of splices normalizes to the
        // same term as the explicitly applied form.
        let composed = "main :: Arr Float -> Float\nmain = [|| $$normVec . $$toVec ||]\n";
        let explicit = "main :: Arr Float -> Float\nmain = [|| \\a -> $$normVec ($$toVec a) ||]\n";
        let mut a = front(composed, Options::default()).unwrap();
        let mut b = front(explicit, Options::default()).unwrap();
        let (nf_a, _) = a.normalize().unwrap();
        let (nf_b, _) = b.normalize().unwrap();
        assert!(alpha_eq(&nf_a.term, &nf_b.term));
    }

    #[test]
    fn user_definitions_shadow_the_prelude() {
        let src = "\
minim = [|| \\x y -> x ||]
main :: Float -> Float
main = [|| \\a -> $$minim a 1.0 ||]
";
        let mut p = front(src, Options::default()).unwrap();
        let (nf, _) = p.normalize().unwrap();
        // The shadowed minim ignores its second argument entirely.
        let expected = typed_term_from_text(
            "\\a -> a",
            Some(&ObjType::fun(ObjType::FLOAT, ObjType::FLOAT)),
        )
        .unwrap();
        assert!(alpha_eq(&nf.term, &expected.term));
    }

    #[test]
    fn missing_entry_signature_is_rejected() {
        let err = match front("main = [|| \\x -> x ||]\n", Options::default()) {
            Err(d) => d,
            Ok(_) => panic!("expected an error"),
        };
        assert_eq!(err.code, codes::ENTRY_SIGNATURE);
    }

    #[test]
    fn missing_entry_definition_is_rejected() {
        let err = match front("other :: Int\nother = [|| 1 ||]\n", Options::default()) {
            Err(d) => d,
            Ok(_) => panic!("expected an error"),
        };
        assert_eq!(err.code, codes::UNBOUND_NAME);
    }

    #[test]
    fn power_variants_differ_before_normalization() {
        let power = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/power.qf"),
        )
        .unwrap();
        let power2 = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/power2.qf"),
        )
        .unwrap();
        let a = front(&power, Options::default()).unwrap();
        let b = front(&power2, Options::default()).unwrap();
        assert!(!alpha_eq(&a.typed.term, &b.typed.term));
    }

    #[test]
    fn compile_output_contains_routine_and_is_deterministic() {
        let src = "main :: Float -> Float\nmain = [|| \\x -> x * 2.0 ||]\n";
        let a = compile(src, Options::default()).unwrap();
        let b = compile(src, Options::default()).unwrap();
        assert_eq!(a.c_source, b.c_source);
        assert!(a.c_source.contains("float prog(float"));
    }
}
