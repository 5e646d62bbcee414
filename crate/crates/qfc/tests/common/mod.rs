//! Shared helpers for the integration suites: corpus loading, pipeline
//! shortcuts, and a cc harness that runs generated C on sampled inputs.
//! Each suite uses a different subset.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use qfc::ast::{Base, ObjType};
use qfc::pipeline::{compile, front, CompileOutput, Options, Pipeline};
use qfc::verify::{sample_args, Rng, Value, ORACLE_SEED};

pub const CORPUS: &[&str] = &[
    "power", "power2", "fib", "dot", "norm", "blur", "blurmem", "window",
];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(format!("{name}.qf"))
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).expect("corpus file")
}

pub fn front_corpus(name: &str) -> Pipeline {
    front(&corpus_source(name), Options::default()).expect(name)
}

pub fn compile_corpus(name: &str) -> CompileOutput {
    compile(&corpus_source(name), Options::default()).expect(name)
}

// ---------------------------------------------------------------------------
// C harness
// ---------------------------------------------------------------------------

fn flatten_value(v: &Value, out: &mut Vec<String>, statics: &mut Vec<String>, id: &mut usize) {
    match v {
        Value::Int(n) => out.push(format!("{n}")),
        Value::Float(x) => out.push(format!("{:?}f", *x as f32)),
        Value::Bool(b) => out.push(if *b { "true" } else { "false" }.to_string()),
        Value::Unit => {}
        Value::Pair(a, b) => {
            flatten_value(a, out, statics, id);
            flatten_value(b, out, statics, id);
        }
        Value::Arr(xs) => {
            let name = format!("qa{}", *id);
            *id += 1;
            let elems: Vec<String> = xs.iter().map(|e| format!("{:?}f", as_f32(e))).collect();
            // Zero-length arrays still need a valid pointer.
            let body = if elems.is_empty() {
                "0.0f".to_string()
            } else {
                elems.join(", ")
            };
            statics.push(format!("static float {name}_data[] = {{ {body} }};"));
            out.push(format!(
                "(qf_arr_float){{ {}u, {name}_data }}",
                xs.len()
            ));
        }
        Value::Sum { .. } | Value::Fun(_) => panic!("cannot pass this value to C"),
    }
}

fn as_f32(v: &Value) -> f32 {
    match v {
        Value::Float(x) => *x as f32,
        other => panic!("expected float element, got {other:?}"),
    }
}

/// Builds, compiles, and runs a driver that calls `prog` on each sampled
/// argument vector and prints one result per line. Returns the parsed
/// values.결과 types covered: Float, Int, Bool, Arr Float.
pub fn run_compiled(
    c_source: &str,
    top: &ObjType,
    inputs: &[Vec<Value>],
    tag: &str,
) -> Vec<Value> {
    let (_, result_ty) = top.uncurry();
    let dir = std::env::temp_dir().join(format!("qfc-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("qf_runtime.h"), qfc::backend::RUNTIME_HEADER).unwrap();

    let mut driver = String::from(c_source);
    driver.push_str("\n#include <stdio.h>\n");
    let mut statics = Vec::new();
    let mut calls = String::new();
    let mut id = 0usize;
    for args in inputs {
        let mut flat = Vec::new();
        for a in args {
            flatten_value(a, &mut flat, &mut statics, &mut id);
        }
        let call = format!("prog({})", flat.join(", "));
        match result_ty {
            ObjType::Base(Base::Float) => {
                calls.push_str(&format!("    printf(\"%.9e\\n\", (double){call});\n"));
            }
            ObjType::Base(Base::Int) => {
                calls.push_str(&format!("    printf(\"%d\\n\", {call});\n"));
            }
            ObjType::Base(Base::Bool) => {
                calls.push_str(&format!("    printf(\"%d\\n\", (int){call});\n"));
            }
            ObjType::Array(_) => {
                calls.push_str(&format!(
                    "    {{ qf_arr_float out = {call}; printf(\"len %u\\n\", out.len); \
                     for (uint32_t i = 0; i < out.len; i++) printf(\"%.9e\\n\", (double)out.data[i]); }}\n"
                ));
            }
            other => panic!("driver cannot print result type {other:?}"),
        }
    }
    driver.push('\n');
    for s in &statics {
        driver.push_str(s);
        driver.push('\n');
    }
    driver.push_str("\nint main(void) {\n");
    driver.push_str(&calls);
    driver.push_str("    return 0;\n}\n");
    std::fs::write(dir.join("driver.c"), driver).unwrap();

    let exe = dir.join("driver");
    let cc = Command::new("cc")
        .args([
            "-std=c99",
            "-O1",
            "-fwrapv",
            "-Wall",
            "-Werror",
            "driver.c",
            "-o",
        ])
        .arg(&exe)
        .arg("-lm")
        .current_dir(&dir)
        .output()
        .expect("cc runs");
    assert!(
        cc.status.success(),
        "cc failed:\n{}",
        String::from_utf8_lossy(&cc.stderr)
    );
    let run = Command::new(&exe).output().expect("compiled driver runs");
    assert!(run.status.success(), "driver exited nonzero");
    let stdout = String::from_utf8(run.stdout).unwrap();

    let mut lines = stdout.lines();
    let mut results = Vec::new();
    for _ in inputs {
        match result_ty {
            ObjType::Base(Base::Float) => {
                let v: f64 = lines.next().unwrap().trim().parse().unwrap();
                results.push(Value::Float(v));
            }
            ObjType::Base(Base::Int) => {
                let v: i32 = lines.next().unwrap().trim().parse().unwrap();
                results.push(Value::Int(v));
            }
            ObjType::Base(Base::Bool) => {
                let v: i32 = lines.next().unwrap().trim().parse().unwrap();
                results.push(Value::Bool(v != 0));
            }
            ObjType::Array(_) => {
                let header = lines.next().unwrap();
                let len: usize = header.trim_start_matches("len ").trim().parse().unwrap();
                let mut xs = Vec::with_capacity(len);
                for _ in 0..len {
                    let v: f64 = lines.next().unwrap().trim().parse().unwrap();
                    xs.push(Value::Float(v));
                }
                results.push(Value::Arr(std::rc::Rc::new(xs)));
            }
            _ => unreachable!(),
        }
    }
    results
}

/// The standard seeded argument sets for a program.
pub fn seeded_inputs(top: &ObjType, samples: usize) -> Vec<Vec<Value>> {
    let (arg_tys, _) = top.uncurry();
    let mut rng = Rng::new(ORACLE_SEED);
    (0..samples)
        .map(|_| sample_args(&arg_tys, &mut rng))
        .collect()
}
