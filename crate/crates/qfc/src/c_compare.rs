//! Alpha-comparison of generated C against golden listings.
//!
//! Both sides are parsed into a small statement/expression tree; comparison
//! is insensitive to whitespace, parenthesization, float literal suffixes,
//! declaration order, and a consistent renaming of identifiers. Preprocessor
//! lines are skipped. The grammar covers what the backend emits: scalar
//! declarations, assignments, if/else, while, for, and pure expressions.

use std::collections::HashMap;

use crate::diag::{codes, Diagnostic, Result};

#[derive(Clone, Debug, PartialEq)]
enum CTok {
    Ident(String),
    Num(f64),
    Punct(&'static str),
}

fn lex(src: &str) -> Result<Vec<CTok>> {
    let mut out = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && i + 1 < b.len() && b[i + 1] == b'/' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && i + 1 < b.len() && b[i + 1] == b'*' {
            i += 2;
            while i + 1 < b.len() && !(b[i] == b'*' && b[i + 1] == b'/') {
                i += 1;
            }
            i += 2;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(CTok::Ident(
                std::str::from_utf8(&b[start..i]).unwrap().to_string(),
            ));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len()
                && (b[i].is_ascii_digit() || b[i] == b'.' || b[i] == b'e' || b[i] == b'E'
                    || ((b[i] == b'+' || b[i] == b'-')
                        && (b[i - 1] == b'e' || b[i - 1] == b'E')))
            {
                i += 1;
            }
            let text = std::str::from_utf8(&b[start..i]).unwrap();
            // Suffix-insensitive: 1.0f, 1.0F, 1.0 all parse the same.
            if i < b.len() && (b[i] == b'f' || b[i] == b'F') {
                i += 1;
            }
            let v: f64 = text.parse().map_err(|_| {
                Diagnostic::new(codes::PARSE, format!("bad C numeric literal `{text}`"))
            })?;
            out.push(CTok::Num(v));
            continue;
        }
        let two = if i + 1 < b.len() { &src[i..i + 2] } else { "" };
        let tok = match two {
            "==" => Some("=="),
            "!=" => Some("!="),
            "<=" => Some("<="),
            ">=" => Some(">="),
            "&&" => Some("&&"),
            "||" => Some("||"),
            "++" => Some("++"),
            _ => None,
        };
        if let Some(t) = tok {
            out.push(CTok::Punct(t));
            i += 2;
            continue;
        }
        let one = match c {
            b'(' => "(",
            b')' => ")",
            b'{' => "{",
            b'}' => "}",
            b'[' => "[",
            b']' => "]",
            b';' => ";",
            b',' => ",",
            b'=' => "=",
            b'<' => "<",
            b'>' => ">",
            b'+' => "+",
            b'-' => "-",
            b'*' => "*",
            b'/' => "/",
            b'%' => "%",
            b'!' => "!",
            b'?' => "?",
            b':' => ":",
            b'.' => ".",
            other => {
                return Err(Diagnostic::new(
                    codes::PARSE,
                    format!("unexpected C character `{}`", other as char),
                ))
            }
        };
        out.push(CTok::Punct(one));
        i += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Id(String),
    Num(f64),
    Call(String, Vec<Expr>),
    Member(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Un(&'static str, Box<Expr>),
    Bin(&'static str, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Cast(String, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Stmt {
    Assign(Expr, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    For(String, Expr, Vec<Stmt>),
    Break,
    Return(Expr),
}

#[derive(Clone, Debug)]
struct Func {
    ret: String,
    params: Vec<(String, String)>,
    decls: Vec<(String, String)>,
    body: Vec<Stmt>,
}

struct P {
    toks: Vec<CTok>,
    i: usize,
}

const TYPE_NAMES: &[&str] = &[
    "float", "double", "int", "int32_t", "uint32_t", "bool",
    "qf_arr_float", "qf_arr_int", "qf_arr_bool",
];

impl P {
    fn peek(&self) -> Option<&CTok> {
        self.toks.get(self.i)
    }
    fn bump(&mut self) -> Option<CTok> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }
    fn eat(&mut self, p: &str) -> Result<()> {
        match self.bump() {
            Some(CTok::Punct(q)) if q == p => Ok(()),
            other => Err(Diagnostic::new(
                codes::PARSE,
                format!("expected `{p}` in C text, found {other:?}"),
            )),
        }
    }
    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Some(CTok::Ident(s)) => Ok(s),
            other => Err(Diagnostic::new(
                codes::PARSE,
                format!("expected identifier in C text, found {other:?}"),
            )),
        }
    }
    fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(CTok::Punct(q)) if *q == p)
    }
    fn at_type(&self) -> bool {
        matches!(self.peek(), Some(CTok::Ident(s)) if TYPE_NAMES.contains(&s.as_str()))
    }

    fn function(&mut self) -> Result<Func> {
        // Skip typedefs the emitter may produce for struct returns.
        while matches!(self.peek(), Some(CTok::Ident(s)) if s == "typedef") {
            while !self.at_punct(";") {
                self.bump();
            }
            self.bump();
        }
        let ret = self.ident()?;
        let _name = self.ident()?;
        self.eat("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                let ty = self.ident()?;
                let name = self.ident()?;
                params.push((ty, name));
                if self.at_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.eat(")")?;
        self.eat("{")?;
        let mut decls = Vec::new();
        while self.at_type() {
            let ty = self.ident()?;
            let name = self.ident()?;
            self.eat(";")?;
            decls.push((ty, name));
        }
        let mut body = Vec::new();
        while !self.at_punct("}") {
            body.push(self.stmt()?);
        }
        self.eat("}")?;
        Ok(Func {
            ret,
            params,
            decls,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.eat("{")?;
        let mut out = Vec::new();
        while !self.at_punct("}") {
            out.push(self.stmt()?);
        }
        self.eat("}")?;
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        if let Some(CTok::Ident(kw)) = self.peek() {
            match kw.as_str() {
                "if" => {
                    self.bump();
                    self.eat("(")?;
                    let c = self.expr()?;
                    self.eat(")")?;
                    let t = self.block()?;
                    let e = if matches!(self.peek(), Some(CTok::Ident(s)) if s == "else") {
                        self.bump();
                        self.block()?
                    } else {
                        Vec::new()
                    };
                    return Ok(Stmt::If(c, t, e));
                }
                "while" => {
                    self.bump();
                    self.eat("(")?;
                    let c = self.expr()?;
                    self.eat(")")?;
                    let b = self.block()?;
                    return Ok(Stmt::While(c, b));
                }
                "for" => {
                    self.bump();
                    self.eat("(")?;
                    let var = self.ident()?;
                    self.eat("=")?;
                    let _zero = self.expr()?;
                    self.eat(";")?;
                    let var2 = self.ident()?;
                    if var2 != var {
                        return Err(Diagnostic::new(codes::PARSE, "unsupported for loop shape"));
                    }
                    self.eat("<")?;
                    let bound = self.expr()?;
                    self.eat(";")?;
                    let var3 = self.ident()?;
                    if var3 != var {
                        return Err(Diagnostic::new(codes::PARSE, "unsupported for loop shape"));
                    }
                    self.eat("++")?;
                    self.eat(")")?;
                    let b = self.block()?;
                    return Ok(Stmt::For(var, bound, b));
                }
                "break" => {
                    self.bump();
                    self.eat(";")?;
                    return Ok(Stmt::Break);
                }
                "return" => {
                    self.bump();
                    let e = self.expr()?;
                    self.eat(";")?;
                    return Ok(Stmt::Return(e));
                }
                _ => {}
            }
        }
        let lhs = self.expr()?;
        self.eat("=")?;
        let rhs = self.expr()?;
        self.eat(";")?;
        Ok(Stmt::Assign(lhs, rhs))
    }

    fn expr(&mut self) -> Result<Expr> {
        let c = self.binary(0)?;
        if self.at_punct("?") {
            self.bump();
            let t = self.expr()?;
            self.eat(":")?;
            let e = self.expr()?;
            return Ok(Expr::Ternary(Box::new(c), Box::new(t), Box::new(e)));
        }
        Ok(c)
    }

    // Precedence climbing over ||, &&, ==/!=, </<=/>/>=, +/-, * / %.
    fn binary(&mut self, min: u8) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let (op, prec): (&'static str, u8) = match self.peek() {
                Some(CTok::Punct(p)) => match *p {
                    "||" => ("||", 1),
                    "&&" => ("&&", 2),
                    "==" => ("==", 3),
                    "!=" => ("!=", 3),
                    "<" => ("<", 4),
                    "<=" => ("<=", 4),
                    ">" => (">", 4),
                    ">=" => (">=", 4),
                    "+" => ("+", 5),
                    "-" => ("-", 5),
                    "*" => ("*", 6),
                    "/" => ("/", 6),
                    "%" => ("%", 6),
                    _ => break,
                },
                _ => break,
            };
            if prec < min {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.at_punct("-") {
            self.bump();
            return Ok(Expr::Un("-", Box::new(self.unary()?)));
        }
        if self.at_punct("!") {
            self.bump();
            return Ok(Expr::Un("!", Box::new(self.unary()?)));
        }
        // Cast: `(typename) expr`
        if self.at_punct("(") {
            if let Some(CTok::Ident(s)) = self.toks.get(self.i + 1) {
                if TYPE_NAMES.contains(&s.as_str())
                    && matches!(self.toks.get(self.i + 2), Some(CTok::Punct(")")))
                {
                    self.bump();
                    let ty = self.ident()?;
                    self.eat(")")?;
                    return Ok(Expr::Cast(ty, Box::new(self.unary()?)));
                }
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.at_punct(".") {
                self.bump();
                let field = self.ident()?;
                e = Expr::Member(Box::new(e), field);
            } else if self.at_punct("[") {
                self.bump();
                let ix = self.expr()?;
                self.eat("]")?;
                e = Expr::Index(Box::new(e), Box::new(ix));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(CTok::Num(v)) => Ok(Expr::Num(v)),
            Some(CTok::Ident(name)) => {
                if self.at_punct("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.at_punct(",") {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.eat(")")?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Id(name))
                }
            }
            Some(CTok::Punct("(")) => {
                let e = self.expr()?;
                self.eat(")")?;
                Ok(e)
            }
            other => Err(Diagnostic::new(
                codes::PARSE,
                format!("unexpected token {other:?} in C expression"),
            )),
        }
    }
}

fn parse_func(src: &str) -> Result<Func> {
    let toks = lex(src)?;
    let mut p = P { toks, i: 0 };
    p.function()
}

struct Matcher {
    // Bidirectional identifier mapping, left text -> right text and back.
    fwd: HashMap<String, String>,
    bwd: HashMap<String, String>,
}

impl Matcher {
    fn map(&mut self, a: &str, b: &str) -> bool {
        match (self.fwd.get(a), self.bwd.get(b)) {
            (Some(x), Some(y)) => x == b && y == a,
            (None, None) => {
                self.fwd.insert(a.to_string(), b.to_string());
                self.bwd.insert(b.to_string(), a.to_string());
                true
            }
            _ => false,
        }
    }

    fn exprs(&mut self, a: &Expr, b: &Expr) -> bool {
        match (a, b) {
            (Expr::Id(x), Expr::Id(y)) => self.map(x, y),
            (Expr::Num(x), Expr::Num(y)) => x == y,
            (Expr::Call(f, xs), Expr::Call(g, ys)) => {
                // Runtime helpers must match by name, not bijection.
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.exprs(x, y))
            }
            (Expr::Member(x, f), Expr::Member(y, g)) => f == g && self.exprs(x, y),
            (Expr::Index(x, i), Expr::Index(y, j)) => self.exprs(x, y) && self.exprs(i, j),
            (Expr::Un(o1, x), Expr::Un(o2, y)) => o1 == o2 && self.exprs(x, y),
            (Expr::Bin(o1, x1, y1), Expr::Bin(o2, x2, y2)) => {
                o1 == o2 && self.exprs(x1, x2) && self.exprs(y1, y2)
            }
            (Expr::Ternary(c1, t1, e1), Expr::Ternary(c2, t2, e2)) => {
                self.exprs(c1, c2) && self.exprs(t1, t2) && self.exprs(e1, e2)
            }
            (Expr::Cast(t1, x), Expr::Cast(t2, y)) => t1 == t2 && self.exprs(x, y),
            // A cast on one side only is tolerated (e.g. array lengths).
            (Expr::Cast(_, x), y) => self.exprs(x, y),
            (x, Expr::Cast(_, y)) => self.exprs(x, y),
            _ => false,
        }
    }

    fn stmts(&mut self, a: &[Stmt], b: &[Stmt]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| match (x, y) {
                (Stmt::Assign(l1, r1), Stmt::Assign(l2, r2)) => {
                    self.exprs(l1, l2) && self.exprs(r1, r2)
                }
                (Stmt::If(c1, t1, e1), Stmt::If(c2, t2, e2)) => {
                    self.exprs(c1, c2) && self.stmts(t1, t2) && self.stmts(e1, e2)
                }
                (Stmt::While(c1, b1), Stmt::While(c2, b2)) => {
                    self.exprs(c1, c2) && self.stmts(b1, b2)
                }
                (Stmt::For(v1, n1, b1), Stmt::For(v2, n2, b2)) => {
                    self.map(v1, v2) && self.exprs(n1, n2) && self.stmts(b1, b2)
                }
                (Stmt::Break, Stmt::Break) => true,
                (Stmt::Return(x), Stmt::Return(y)) => self.exprs(x, y),
                _ => false,
            })
    }
}

fn norm_type(t: &str) -> &str {
    match t {
        "int" | "int32_t" => "int32_t",
        "double" => "float",
        other => other,
    }
}

/// Compares two C function texts for structural equality modulo whitespace,
/// identifier renaming, declaration order, parenthesization, and float
/// suffixes. Returns a description of the first difference.
pub fn c_alpha_eq(left: &str, right: &str) -> std::result::Result<(), String> {
    let fa = parse_func(left).map_err(|d| format!("left side did not parse: {d}"))?;
    let fb = parse_func(right).map_err(|d| format!("right side did not parse: {d}"))?;
    if norm_type(&fa.ret) != norm_type(&fb.ret) {
        return Err(format!("return types differ: {} vs {}", fa.ret, fb.ret));
    }
    if fa.params.len() != fb.params.len() {
        return Err("parameter counts differ".to_string());
    }
    let mut m = Matcher {
        fwd: HashMap::new(),
        bwd: HashMap::new(),
    };
    for ((t1, n1), (t2, n2)) in fa.params.iter().zip(&fb.params) {
        if norm_type(t1) != norm_type(t2) {
            return Err(format!("parameter types differ: {t1} vs {t2}"));
        }
        if !m.map(n1, n2) {
            return Err("parameter naming is inconsistent".to_string());
        }
    }
    if !m.stmts(&fa.body, &fb.body) {
        return Err("statement structure differs".to_string());
    }
    // Declarations: order-insensitive; every mapped pair must agree on type.
    if fa.decls.len() != fb.decls.len() {
        return Err(format!(
            "declaration counts differ: {} vs {}",
            fa.decls.len(),
            fb.decls.len()
        ));
    }
    for (t1, n1) in &fa.decls {
        match m.fwd.get(n1) {
            None => {
                // Declared but never used on the left; require a matching
                // unused declaration of the same type on the right.
                if !fb
                    .decls
                    .iter()
                    .any(|(t2, n2)| norm_type(t1) == norm_type(t2) && !m.bwd.contains_key(n2))
                {
                    return Err(format!("unmatched declaration {t1} {n1}"));
                }
            }
            Some(n2) => {
                let Some((t2, _)) = fb.decls.iter().find(|(_, n)| n == n2) else {
                    return Err(format!("{n2} used on the right but not declared"));
                };
                if norm_type(t1) != norm_type(t2) {
                    return Err(format!("declaration types differ for {n1}: {t1} vs {t2}"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "\
float prog (float u) {
  float w; float v; float r;
  if (u == 0.0) {
    r = 0.0;
  } else {
    v = (u * 1.0);
    w = (u * (v * v));
    r = (1.0f / (w * w));
  }
  return r;
}
";

    #[test]
    fn listing_equals_itself_renamed() {
        let renamed = "\
float prog (float x0) {
  float y7; float y6; float r;
  if (x0 == 0.0) {
    r = 0.0;
  } else {
    y6 = (x0 * 1.0);
    y7 = (x0 * (y6 * y6));
    r = (1.0f / (y7 * y7));
  }
  return r;
}
";
        assert_eq!(c_alpha_eq(LISTING, renamed), Ok(()));
    }

    #[test]
    fn decl_order_and_suffixes_are_ignored() {
        let other = "\
float prog(float a) {
    float r;
    float b;
    float c;
    if (a == 0.0f) { r = 0.0f; } else {
        b = a * 1.0f;
        c = a * (b * b);
        r = 1.0f / (c * c);
    }
    return r;
}
";
        assert_eq!(c_alpha_eq(LISTING, other), Ok(()));
    }

    #[test]
    fn structural_difference_detected() {
        let wrong = "\
float prog(float u) {
    float r;
    r = u;
    return r;
}
";
        assert!(c_alpha_eq(LISTING, wrong).is_err());
    }

    #[test]
    fn inconsistent_renaming_detected() {
        // Swapping the roles of v and w changes the dataflow.
        let wrong = "\
float prog(float u) {
    float v; float w; float r;
    if (u == 0.0) {
        r = 0.0;
    } else {
        v = u * 1.0;
        w = u * (v * w);
        r = 1.0 / (w * v);
    }
    return r;
}
";
        assert!(c_alpha_eq(LISTING, wrong).is_err());
    }
}
