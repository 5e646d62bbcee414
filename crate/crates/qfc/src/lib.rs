//! A compiler toolkit for a quoted DSL: a two-stage surface language whose
//! generation stage produces closed object terms, a sharing-preserving
//! normalizer that establishes the subformula property, property checkers
//! with a reference interpreter, and a C backend.
//!
//! ```
//! use qfc::pipeline::{compile, Options};
//!
//! let source = r#"
//! square = [|| \y -> y * y ||]
//! main :: Float -> Float
//! main = [|| \x -> $$square (x + 1.0) ||]
//! "#;
//! let out = compile(source, Options::default()).unwrap();
//! assert!(out.c_source.contains("float prog(float"));
//! // The staged application is gone; one shared binding remains.
//! assert_eq!(qfc::pretty::pretty_term(&out.normal.term),
//!            "\\x -> let t = x + 1.0 in t * t");
//! ```

pub mod ast;
pub mod backend;
pub mod c_compare;
pub mod consts;
pub mod desugar;
pub mod diag;
pub mod normalize;
pub mod parser;
pub mod pipeline;
pub mod pretty;
pub mod stage0;
pub mod surface;
pub mod typecheck;
pub mod verify;
