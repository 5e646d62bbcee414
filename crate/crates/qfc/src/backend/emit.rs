//! Deterministic C99 text emission.

use std::fmt::Write;

use super::cir::{CBinOp, CExpr, CStmt, CUnit};

/// The fixed runtime header emitted next to every translation unit. Arrays
/// are a length/buffer record; all allocation funnels through one helper per
/// element type so materializations can be counted. Define `QF_CHECKED` for
/// bounds-checked indexing.
pub const RUNTIME_HEADER: &str = r#"#ifndef QF_RUNTIME_H
#define QF_RUNTIME_H

#include <math.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>

typedef struct { uint32_t len; float *data; } qf_arr_float;
typedef struct { uint32_t len; int32_t *data; } qf_arr_int;
typedef struct { uint32_t len; bool *data; } qf_arr_bool;

static inline qf_arr_float qf_alloc_float(int32_t len) {
    qf_arr_float a;
    a.len = len < 0 ? 0u : (uint32_t)len;
    a.data = (float *)malloc((size_t)a.len * sizeof(float));
    return a;
}

static inline qf_arr_int qf_alloc_int(int32_t len) {
    qf_arr_int a;
    a.len = len < 0 ? 0u : (uint32_t)len;
    a.data = (int32_t *)malloc((size_t)a.len * sizeof(int32_t));
    return a;
}

static inline qf_arr_bool qf_alloc_bool(int32_t len) {
    qf_arr_bool a;
    a.len = len < 0 ? 0u : (uint32_t)len;
    a.data = (bool *)malloc((size_t)a.len * sizeof(bool));
    return a;
}

#ifdef QF_CHECKED
static inline uint32_t qf_bounds(int32_t i, uint32_t len) {
    if ((uint32_t)i >= len) {
        fprintf(stderr, "qf: index %d out of bounds for length %u\n", i, len);
        exit(2);
    }
    return (uint32_t)i;
}
#define qf_ix_float(a, i) ((a).data[qf_bounds((i), (a).len)])
#define qf_ix_int(a, i) ((a).data[qf_bounds((i), (a).len)])
#define qf_ix_bool(a, i) ((a).data[qf_bounds((i), (a).len)])
#else
#define qf_ix_float(a, i) ((a).data[(i)])
#define qf_ix_int(a, i) ((a).data[(i)])
#define qf_ix_bool(a, i) ((a).data[(i)])
#endif

#endif /* QF_RUNTIME_H */
"#;

fn float_lit(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') {
        format!("{s}f")
    } else {
        format!("{s}.0f")
    }
}

// Expression precedences: 0 ternary, 1 comparison, 2 additive,
// 3 multiplicative, 4 unary, 5 primary.
fn expr_prec(e: &CExpr) -> u8 {
    match e {
        CExpr::Ternary(_, _, _) => 0,
        CExpr::Bin(op, _, _) => match op {
            CBinOp::Eq | CBinOp::Lt => 1,
            CBinOp::Add | CBinOp::Sub => 2,
            CBinOp::Mul | CBinOp::Div | CBinOp::Mod => 3,
        },
        CExpr::Not(_) => 4,
        _ => 5,
    }
}

fn emit_expr(e: &CExpr, min_prec: u8, out: &mut String) {
    let prec = expr_prec(e);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        CExpr::Var(x) => out.push_str(x),
        CExpr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        CExpr::Float(v) => out.push_str(&float_lit(*v)),
        CExpr::Bool(v) => out.push_str(if *v { "true" } else { "false" }),
        CExpr::Bin(op, a, b) => {
            emit_expr(a, prec, out);
            let _ = write!(out, " {} ", op.symbol());
            emit_expr(b, prec + 1, out);
        }
        CExpr::Not(a) => {
            out.push('!');
            emit_expr(a, 5, out);
        }
        CExpr::Ternary(c, t, f) => {
            emit_expr(c, 1, out);
            out.push_str(" ? ");
            emit_expr(t, 1, out);
            out.push_str(" : ");
            emit_expr(f, 0, out);
        }
        CExpr::Sqrtf(a) => {
            out.push_str("sqrtf(");
            emit_expr(a, 0, out);
            out.push(')');
        }
        CExpr::LenOf(a) => {
            out.push_str("(int32_t)");
            emit_expr(a, 5, out);
            out.push_str(".len");
        }
        CExpr::Index(elem, a, i) => {
            let _ = write!(out, "{}(", elem.ix_name());
            emit_expr(a, 0, out);
            out.push_str(", ");
            emit_expr(i, 0, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

fn emit_stmts(stmts: &[CStmt], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    for stmt in stmts {
        match stmt {
            CStmt::Assign(x, e) => {
                let _ = write!(out, "{pad}{x} = ");
                emit_expr(e, 0, out);
                out.push_str(";\n");
            }
            CStmt::AllocArr(x, elem, n) => {
                let _ = write!(out, "{pad}{x} = {}(", elem.alloc_name());
                emit_expr(n, 0, out);
                out.push_str(");\n");
            }
            CStmt::StoreArr(x, i, e) => {
                let _ = write!(out, "{pad}{x}.data[");
                emit_expr(i, 0, out);
                out.push_str("] = ");
                emit_expr(e, 0, out);
                out.push_str(";\n");
            }
            CStmt::If { cond, then, els } => {
                let _ = write!(out, "{pad}if (");
                emit_expr(cond, 0, out);
                out.push_str(") {\n");
                emit_stmts(then, indent + 1, out);
                if els.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    emit_stmts(els, indent + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            CStmt::While { cond, body } => {
                let _ = write!(out, "{pad}while (");
                emit_expr(cond, 0, out);
                out.push_str(") {\n");
                emit_stmts(body, indent + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            CStmt::Loop { pre, cond, body } => {
                let _ = writeln!(out, "{pad}while (1) {{");
                emit_stmts(pre, indent + 1, out);
                let inner = "    ".repeat(indent + 1);
                let _ = write!(out, "{inner}if (!(");
                emit_expr(cond, 0, out);
                out.push_str(")) {\n");
                let _ = writeln!(out, "{}break;", "    ".repeat(indent + 2));
                let _ = writeln!(out, "{inner}}}");
                emit_stmts(body, indent + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            CStmt::For { var, bound, body } => {
                let _ = write!(out, "{pad}for ({var} = 0; {var} < ");
                emit_expr(bound, 0, out);
                let _ = writeln!(out, "; {var}++) {{");
                emit_stmts(body, indent + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Renders a translation unit as C99 text. The output is deterministic.
pub fn emit(unit: &CUnit) -> String {
    let mut out = String::new();
    for inc in &unit.includes {
        let _ = writeln!(out, "#include \"{inc}\"");
    }
    out.push('\n');
    let f = &unit.function;

    let ret_ty = if f.result.len() == 1 {
        f.result[0].0.c_name().to_string()
    } else {
        // Multi-leaf results return through a per-function struct.
        let struct_name = format!("{}_result", f.name);
        let _ = write!(out, "typedef struct {{ ");
        for (i, (ty, _)) in f.result.iter().enumerate() {
            let _ = write!(out, "{} f{i}; ", ty.c_name());
        }
        let _ = writeln!(out, "}} {struct_name};\n");
        struct_name
    };

    let _ = write!(out, "{ret_ty} {}(", f.name);
    if f.params.is_empty() {
        out.push_str("void");
    } else {
        for (i, (ty, name)) in f.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{} {name}", ty.c_name());
        }
    }
    out.push_str(") {\n");
    for (ty, name) in &f.decls {
        let _ = writeln!(out, "    {} {name};", ty.c_name());
    }
    emit_stmts(&f.body, 1, &mut out);
    if f.result.len() == 1 {
        let _ = writeln!(out, "    return {};", f.result[0].1);
    } else {
        let _ = write!(out, "    return ({ret_ty}){{");
        for (i, (_, name)) in f.result.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(name);
        }
        out.push_str("};\n");
    }
    out.push_str("}\n");
    out
}
