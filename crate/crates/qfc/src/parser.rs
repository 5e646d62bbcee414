//! Lexer and parser for `.qf` modules.
//!
//! The grammar is Haskell-like and mostly layout-insensitive: the only layout
//! rule is that a top-level definition begins with an identifier in column 1
//! followed by `=` or `::`, and continuation lines are indented. Quotation is
//! written `[|| e ||]`, splicing `$$( e )` or `$$name`, comments `-- ...`.

use crate::diag::{codes, Diagnostic, Pos, Result};
use crate::surface::{BinOp, Builtin, Def, DoStmt, Expr, ExprKind, Pat, SourceModule, TypeExpr};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    ConId(String),
    Int(i64),
    Float(f64),
    Lambda,
    Arrow,     // ->
    BindArrow, // <-
    DColon,    // ::
    Equals,
    OpenQuote,  // [||
    CloseQuote, // ||]
    SpliceOpen, // $$( — after `$$` with `(`
    SpliceName(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Dot,
    EqEq,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::ConId(s) | Tok::SpliceName(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Float(x) => format!("`{x}`"),
            Tok::Lambda => "`\\`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::BindArrow => "`<-`".into(),
            Tok::DColon => "`::`".into(),
            Tok::Equals => "`=`".into(),
            Tok::OpenQuote => "`[||`".into(),
            Tok::CloseQuote => "`||]`".into(),
            Tok::SpliceOpen => "`$$(`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Dot => "`.`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Ne => "`/=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    i: usize,
    line: u32,
    col: u32,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_lowercase() || c == b'_'
}
fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'\''
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self, k: usize) -> u8 {
        *self.src.get(self.i + k).unwrap_or(&0)
    }

    fn bump(&mut self) -> u8 {
        let c = self.peek(0);
        self.i += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn lex(mut self) -> Result<Vec<(Pos, Tok)>> {
        let mut out = Vec::new();
        loop {
            // Skip whitespace and line comments.
            loop {
                let c = self.peek(0);
                if c == b' ' || c == b'\t' || c == b'\r' || c == b'\n' {
                    self.bump();
                } else if c == b'-' && self.peek(1) == b'-' {
                    while self.peek(0) != b'\n' && self.peek(0) != 0 {
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let pos = Pos::new(self.line, self.col);
            let c = self.peek(0);
            if c == 0 {
                out.push((pos, Tok::Eof));
                return Ok(out);
            }
            let tok = if c.is_ascii_digit() {
                let start = self.i;
                while self.peek(0).is_ascii_digit() {
                    self.bump();
                }
                if self.peek(0) == b'.' && self.peek(1).is_ascii_digit() {
                    self.bump();
                    while self.peek(0).is_ascii_digit() {
                        self.bump();
                    }
                    if (self.peek(0) == b'e' || self.peek(0) == b'E')
                        && (self.peek(1).is_ascii_digit()
                            || ((self.peek(1) == b'+' || self.peek(1) == b'-')
                                && self.peek(2).is_ascii_digit()))
                    {
                        self.bump();
                        if self.peek(0) == b'+' || self.peek(0) == b'-' {
                            self.bump();
                        }
                        while self.peek(0).is_ascii_digit() {
                            self.bump();
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
                    Tok::Float(text.parse().map_err(|_| {
                        Diagnostic::at(codes::LEX, pos, format!("bad float literal `{text}`"))
                    })?)
                } else {
                    let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
                    Tok::Int(text.parse().map_err(|_| {
                        Diagnostic::at(codes::LEX, pos, format!("integer literal out of range `{text}`"))
                    })?)
                }
            } else if is_ident_start(c) {
                let start = self.i;
                while is_ident_char(self.peek(0)) {
                    self.bump();
                }
                Tok::Ident(std::str::from_utf8(&self.src[start..self.i]).unwrap().to_string())
            } else if c.is_ascii_uppercase() {
                let start = self.i;
                while is_ident_char(self.peek(0)) {
                    self.bump();
                }
                Tok::ConId(std::str::from_utf8(&self.src[start..self.i]).unwrap().to_string())
            } else {
                match c {
                    b'[' if self.peek(1) == b'|' && self.peek(2) == b'|' => {
                        self.bump();
                        self.bump();
                        self.bump();
                        Tok::OpenQuote
                    }
                    b'|' if self.peek(1) == b'|' && self.peek(2) == b']' => {
                        self.bump();
                        self.bump();
                        self.bump();
                        Tok::CloseQuote
                    }
                    b'$' if self.peek(1) == b'$' => {
                        self.bump();
                        self.bump();
                        if self.peek(0) == b'(' {
                            self.bump();
                            Tok::SpliceOpen
                        } else if is_ident_start(self.peek(0)) {
                            let start = self.i;
                            while is_ident_char(self.peek(0)) {
                                self.bump();
                            }
                            Tok::SpliceName(
                                std::str::from_utf8(&self.src[start..self.i]).unwrap().to_string(),
                            )
                        } else {
                            return Err(Diagnostic::at(
                                codes::LEX,
                                pos,
                                "expected `(` or a name after `$$`",
                            ));
                        }
                    }
                    b'\\' => {
                        self.bump();
                        Tok::Lambda
                    }
                    b'-' if self.peek(1) == b'>' => {
                        self.bump();
                        self.bump();
                        Tok::Arrow
                    }
                    b'<' if self.peek(1) == b'-' => {
                        self.bump();
                        self.bump();
                        Tok::BindArrow
                    }
                    b'<' if self.peek(1) == b'=' => {
                        self.bump();
                        self.bump();
                        Tok::Le
                    }
                    b'>' if self.peek(1) == b'=' => {
                        self.bump();
                        self.bump();
                        Tok::Ge
                    }
                    b':' if self.peek(1) == b':' => {
                        self.bump();
                        self.bump();
                        Tok::DColon
                    }
                    b'=' if self.peek(1) == b'=' => {
                        self.bump();
                        self.bump();
                        Tok::EqEq
                    }
                    b'/' if self.peek(1) == b'=' => {
                        self.bump();
                        self.bump();
                        Tok::Ne
                    }
                    b'=' => {
                        self.bump();
                        Tok::Equals
                    }
                    b'(' => {
                        self.bump();
                        Tok::LParen
                    }
                    b')' => {
                        self.bump();
                        Tok::RParen
                    }
                    b'{' => {
                        self.bump();
                        Tok::LBrace
                    }
                    b'}' => {
                        self.bump();
                        Tok::RBrace
                    }
                    b',' => {
                        self.bump();
                        Tok::Comma
                    }
                    b';' => {
                        self.bump();
                        Tok::Semi
                    }
                    b'+' => {
                        self.bump();
                        Tok::Plus
                    }
                    b'-' => {
                        self.bump();
                        Tok::Minus
                    }
                    b'*' => {
                        self.bump();
                        Tok::Star
                    }
                    b'/' => {
                        self.bump();
                        Tok::Slash
                    }
                    b'.' => {
                        self.bump();
                        Tok::Dot
                    }
                    b'<' => {
                        self.bump();
                        Tok::Lt
                    }
                    b'>' => {
                        self.bump();
                        Tok::Gt
                    }
                    other => {
                        return Err(Diagnostic::at(
                            codes::LEX,
                            pos,
                            format!("unexpected character `{}`", other as char),
                        ))
                    }
                }
            };
            out.push((pos, tok));
        }
    }
}

struct Parser {
    toks: Vec<(Pos, Tok)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }
    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].1
    }
    fn pos(&self) -> Pos {
        self.toks[self.i].0
    }
    fn bump(&mut self) -> (Pos, Tok) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }
    fn expect(&mut self, want: &Tok, ctx: &str) -> Result<Pos> {
        if self.peek() == want {
            Ok(self.bump().0)
        } else {
            Err(Diagnostic::at(
                codes::PARSE,
                self.pos(),
                format!("expected {} in {ctx}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Diagnostic::at(codes::PARSE, self.pos(), msg.into()))
    }

    // A new top-level definition starts with an identifier in column 1
    // followed by `=` or `::`.
    fn at_def_start(&self) -> bool {
        matches!(
            (&self.toks[self.i].1, self.toks[self.i].0.col),
            (Tok::Ident(_), 1)
        ) && matches!(self.peek2(), Tok::Equals | Tok::DColon)
    }

    fn module(&mut self) -> Result<SourceModule> {
        let mut defs: Vec<Def> = Vec::new();
        let mut pending_sig: Option<(Pos, String, TypeExpr)> = None;
        while *self.peek() != Tok::Eof {
            if !self.at_def_start() {
                return self.err(format!(
                    "expected a top-level definition (found {})",
                    self.peek().describe()
                ));
            }
            let (pos, tok) = self.bump();
            let name = match tok {
                Tok::Ident(n) => n,
                _ => unreachable!(),
            };
            match self.peek() {
                Tok::DColon => {
                    self.bump();
                    let ty = self.type_expr()?;
                    if let Some((p, n, _)) = &pending_sig {
                        return Err(Diagnostic::at(
                            codes::PARSE,
                            *p,
                            format!("signature for `{n}` is not followed by its definition"),
                        ));
                    }
                    pending_sig = Some((pos, name, ty));
                }
                Tok::Equals => {
                    self.bump();
                    let body = self.expr()?;
                    let ascription = match pending_sig.take() {
                        Some((sp, sn, ty)) => {
                            if sn != name {
                                return Err(Diagnostic::at(
                                    codes::PARSE,
                                    sp,
                                    format!("signature for `{sn}` is not followed by its definition"),
                                ));
                            }
                            Some(ty)
                        }
                        None => None,
                    };
                    if defs.iter().any(|d| d.name == name) {
                        return Err(Diagnostic::at(
                            codes::DUPLICATE_DEF,
                            pos,
                            format!("duplicate definition of `{name}`"),
                        ));
                    }
                    defs.push(Def {
                        pos,
                        name,
                        ascription,
                        body,
                    });
                }
                _ => return self.err("expected `=` or `::` after definition name"),
            }
        }
        if let Some((p, n, _)) = pending_sig {
            return Err(Diagnostic::at(
                codes::PARSE,
                p,
                format!("signature for `{n}` is not followed by its definition"),
            ));
        }
        Ok(SourceModule {
            defs,
            entry: "main".to_string(),
        })
    }

    // ---- types ----

    fn type_expr(&mut self) -> Result<TypeExpr> {
        let lhs = self.type_sum()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.type_expr()?;
            Ok(TypeExpr::Fun(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn type_sum(&mut self) -> Result<TypeExpr> {
        let lhs = self.type_app()?;
        if *self.peek() == Tok::Plus {
            self.bump();
            let rhs = self.type_app()?;
            Ok(TypeExpr::Sum(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn type_app(&mut self) -> Result<TypeExpr> {
        if let Tok::ConId(con) = self.peek().clone() {
            match con.as_str() {
                "Arr" => {
                    self.bump();
                    return Ok(TypeExpr::Array(Box::new(self.type_atom()?)));
                }
                "Maybe" => {
                    self.bump();
                    return Ok(TypeExpr::Maybe(Box::new(self.type_atom()?)));
                }
                "Vec" => {
                    self.bump();
                    return Ok(TypeExpr::Vec(Box::new(self.type_atom()?)));
                }
                _ => {}
            }
        }
        self.type_atom()
    }

    fn type_atom(&mut self) -> Result<TypeExpr> {
        match self.peek().clone() {
            Tok::ConId(con) => {
                let pos = self.pos();
                self.bump();
                match con.as_str() {
                    "Bool" => Ok(TypeExpr::Bool),
                    "Int" => Ok(TypeExpr::Int),
                    "Float" => Ok(TypeExpr::Float),
                    "Unit" => Ok(TypeExpr::Unit),
                    other => Err(Diagnostic::at(
                        codes::PARSE,
                        pos,
                        format!("unknown type constructor `{other}`"),
                    )),
                }
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(TypeExpr::Unit);
                }
                let first = self.type_expr()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let second = self.type_expr()?;
                    self.expect(&Tok::RParen, "pair type")?;
                    Ok(TypeExpr::Prod(Box::new(first), Box::new(second)))
                } else {
                    self.expect(&Tok::RParen, "type")?;
                    Ok(first)
                }
            }
            other => self.err(format!("expected a type, found {}", other.describe())),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Lambda => {
                self.bump();
                let mut pats = vec![self.pattern()?];
                while *self.peek() != Tok::Arrow {
                    pats.push(self.pattern()?);
                }
                self.expect(&Tok::Arrow, "lambda")?;
                let body = self.expr()?;
                Ok(Expr::new(pos, ExprKind::Lam(pats, Box::new(body))))
            }
            Tok::Ident(kw) if kw == "let" => {
                self.bump();
                let name = self.ident("let binder")?;
                self.expect(&Tok::Equals, "let")?;
                let rhs = self.expr()?;
                match self.peek().clone() {
                    Tok::Ident(k) if k == "in" => {
                        self.bump();
                    }
                    _ => return self.err("expected `in` after let binding"),
                }
                let body = self.expr()?;
                Ok(Expr::new(
                    pos,
                    ExprKind::Let(name, Box::new(rhs), Box::new(body)),
                ))
            }
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                let c = self.expr()?;
                self.keyword("then")?;
                let t = self.expr()?;
                self.keyword("else")?;
                let e = self.expr()?;
                Ok(Expr::new(
                    pos,
                    ExprKind::If(Box::new(c), Box::new(t), Box::new(e)),
                ))
            }
            Tok::Ident(kw) if kw == "case" => {
                self.bump();
                let scrut = self.op_expr()?;
                self.keyword("of")?;
                self.expect(&Tok::LBrace, "case alternatives")?;
                self.con_keyword("Inl")?;
                let left_binder = self.binder_or_wild()?;
                self.expect(&Tok::Arrow, "case alternative")?;
                let left = self.expr()?;
                self.expect(&Tok::Semi, "case alternatives")?;
                self.con_keyword("Inr")?;
                let right_binder = self.binder_or_wild()?;
                self.expect(&Tok::Arrow, "case alternative")?;
                let right = self.expr()?;
                self.expect(&Tok::RBrace, "case alternatives")?;
                Ok(Expr::new(
                    pos,
                    ExprKind::Case {
                        scrut: Box::new(scrut),
                        left_binder,
                        left: Box::new(left),
                        right_binder,
                        right: Box::new(right),
                    },
                ))
            }
            Tok::Ident(kw) if kw == "do" => {
                self.bump();
                self.expect(&Tok::LBrace, "do block")?;
                let mut stmts = Vec::new();
                loop {
                    // `x <- e` or an expression
                    if let (Tok::Ident(n), Tok::BindArrow) = (self.peek().clone(), self.peek2().clone()) {
                        let bpos = self.pos();
                        self.bump();
                        self.bump();
                        let e = self.expr()?;
                        stmts.push(DoStmt::Bind(bpos, n, e));
                    } else {
                        stmts.push(DoStmt::Expr(self.expr()?));
                    }
                    if *self.peek() == Tok::Semi {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(&Tok::RBrace, "do block")?;
                Ok(Expr::new(pos, ExprKind::Do(stmts)))
            }
            _ => self.op_expr(),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek().clone() {
            Tok::Ident(k) if k == kw => {
                self.bump();
                Ok(())
            }
            other => self.err(format!("expected `{kw}`, found {}", other.describe())),
        }
    }

    fn con_keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek().clone() {
            Tok::ConId(k) if k == kw => {
                self.bump();
                Ok(())
            }
            other => self.err(format!("expected `{kw}`, found {}", other.describe())),
        }
    }

    fn ident(&mut self, ctx: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(n) if !is_reserved(&n) => {
                self.bump();
                Ok(n)
            }
            other => self.err(format!("expected a name in {ctx}, found {}", other.describe())),
        }
    }

    fn binder_or_wild(&mut self) -> Result<String> {
        // `_` lexes as an identifier; keep it as an ordinary binder name.
        self.ident("binder")
    }

    fn pattern(&mut self) -> Result<Pat> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(n) if !is_reserved(&n) => {
                self.bump();
                Ok(Pat::Var(pos, n))
            }
            Tok::LParen => {
                self.bump();
                if let Tok::ConId(c) = self.peek().clone() {
                    if c == "Vec" {
                        self.bump();
                        let n = self.ident("Vec pattern")?;
                        let g = self.ident("Vec pattern")?;
                        self.expect(&Tok::RParen, "Vec pattern")?;
                        return Ok(Pat::Vec(pos, n, g));
                    }
                }
                let first = self.pattern()?;
                self.expect(&Tok::Comma, "pair pattern")?;
                let second = self.pattern()?;
                self.expect(&Tok::RParen, "pair pattern")?;
                Ok(Pat::Pair(pos, Box::new(first), Box::new(second)))
            }
            other => self.err(format!("expected a pattern, found {}", other.describe())),
        }
    }

    // Comparison (non-assoc) over additive over multiplicative over
    // composition over application.
    fn op_expr(&mut self) -> Result<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            Tok::Ne => Some(BinOp::Ne),
            _ => None,
        };
        if let Some(op) = op {
            let pos = self.pos();
            self.bump();
            let rhs = self.additive()?;
            Ok(Expr::new(pos, ExprKind::Bin(op, Box::new(lhs), Box::new(rhs))))
        } else {
            Ok(lhs)
        }
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Expr::new(pos, ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut lhs = self.composition()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.composition()?;
            lhs = Expr::new(pos, ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn composition(&mut self) -> Result<Expr> {
        let lhs = self.application()?;
        if *self.peek() == Tok::Dot {
            let pos = self.pos();
            self.bump();
            let rhs = self.composition()?;
            Ok(Expr::new(
                pos,
                ExprKind::Compose(Box::new(lhs), Box::new(rhs)),
            ))
        } else {
            Ok(lhs)
        }
    }

    fn at_atom_start(&self) -> bool {
        if self.at_def_start() {
            return false;
        }
        match self.peek() {
            Tok::Ident(n) => !is_reserved_nonatom(n),
            Tok::ConId(_)
            | Tok::Int(_)
            | Tok::Float(_)
            | Tok::LParen
            | Tok::OpenQuote
            | Tok::SpliceOpen
            | Tok::SpliceName(_) => true,
            _ => false,
        }
    }

    fn application(&mut self) -> Result<Expr> {
        let pos = self.pos();
        // Built-in prefix forms with fixed arity.
        if let Tok::Ident(name) = self.peek().clone() {
            let fixed: Option<(usize, fn(Pos, Vec<Expr>) -> ExprKind)> = match name.as_str() {
                "fst" => Some((1, |_, mut a| ExprKind::Fst(Box::new(a.remove(0))))),
                "snd" => Some((1, |_, mut a| ExprKind::Snd(Box::new(a.remove(0))))),
                "div" => Some((2, |_, a| ExprKind::Builtin(Builtin::DivI, a))),
                "mod" => Some((2, |_, a| ExprKind::Builtin(Builtin::ModI, a))),
                "even" => Some((1, |_, a| ExprKind::Builtin(Builtin::Even, a))),
                "odd" => Some((1, |_, a| ExprKind::Builtin(Builtin::Odd, a))),
                "return" => Some((1, |_, mut a| ExprKind::Return(Box::new(a.remove(0))))),
                "maybe" => Some((3, |_, mut a| {
                    let m = a.pop().unwrap();
                    let f = a.pop().unwrap();
                    let d = a.pop().unwrap();
                    ExprKind::MaybeElim(Box::new(d), Box::new(f), Box::new(m))
                })),
                _ => None,
            };
            if let Some((arity, build)) = fixed {
                self.bump();
                let mut args = Vec::new();
                for _ in 0..arity {
                    if !self.at_atom_start() {
                        return self.err(format!("`{name}` expects {arity} argument(s)"));
                    }
                    args.push(self.atom()?);
                }
                let mut e = Expr::new(pos, build(pos, args));
                while self.at_atom_start() {
                    let arg = self.atom()?;
                    e = Expr::new(pos, ExprKind::App(Box::new(e), Box::new(arg)));
                }
                return Ok(e);
            }
        }
        if let Tok::ConId(name) = self.peek().clone() {
            let fixed: Option<(usize, fn(Vec<Expr>) -> ExprKind)> = match name.as_str() {
                "Just" => Some((1, |mut a| ExprKind::Just(Box::new(a.remove(0))))),
                "Inl" => Some((1, |mut a| ExprKind::Inl(Box::new(a.remove(0))))),
                "Inr" => Some((1, |mut a| ExprKind::Inr(Box::new(a.remove(0))))),
                "Vec" => Some((2, |mut a| {
                    let f = a.pop().unwrap();
                    let n = a.pop().unwrap();
                    ExprKind::VecCon(Box::new(n), Box::new(f))
                })),
                _ => None,
            };
            if let Some((arity, build)) = fixed {
                self.bump();
                let mut args = Vec::new();
                for _ in 0..arity {
                    if !self.at_atom_start() {
                        return self.err(format!("`{name}` expects {arity} argument(s)"));
                    }
                    args.push(self.atom()?);
                }
                let mut e = Expr::new(pos, build(args));
                while self.at_atom_start() {
                    let arg = self.atom()?;
                    e = Expr::new(pos, ExprKind::App(Box::new(e), Box::new(arg)));
                }
                return Ok(e);
            }
        }
        let mut e = self.atom()?;
        while self.at_atom_start() {
            let arg = self.atom()?;
            e = Expr::new(pos, ExprKind::App(Box::new(e), Box::new(arg)));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(n) => {
                if is_reserved_nonatom(&n) {
                    return self.err(format!("unexpected keyword `{n}`"));
                }
                self.bump();
                Ok(Expr::new(pos, ExprKind::Var(n)))
            }
            Tok::ConId(c) => match c.as_str() {
                "True" => {
                    self.bump();
                    Ok(Expr::new(pos, ExprKind::Bool(true)))
                }
                "False" => {
                    self.bump();
                    Ok(Expr::new(pos, ExprKind::Bool(false)))
                }
                "Nothing" => {
                    self.bump();
                    Ok(Expr::new(pos, ExprKind::Nothing))
                }
                other => self.err(format!("unexpected constructor `{other}`")),
            },
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(pos, ExprKind::Int(v)))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::new(pos, ExprKind::Float(v)))
            }
            Tok::OpenQuote => {
                self.bump();
                let body = self.expr()?;
                self.expect(&Tok::CloseQuote, "quotation")?;
                Ok(Expr::new(pos, ExprKind::Quote(Box::new(body))))
            }
            Tok::SpliceOpen => {
                self.bump();
                let body = self.expr()?;
                self.expect(&Tok::RParen, "splice")?;
                Ok(Expr::new(pos, ExprKind::Splice(Box::new(body))))
            }
            Tok::SpliceName(n) => {
                self.bump();
                Ok(Expr::new(
                    pos,
                    ExprKind::Splice(Box::new(Expr::new(pos, ExprKind::Var(n)))),
                ))
            }
            Tok::LParen => {
                self.bump();
                // () | (op) | (- e) | (e) | (e, e)
                match self.peek().clone() {
                    Tok::RParen => {
                        self.bump();
                        return Ok(Expr::new(pos, ExprKind::Unit));
                    }
                    Tok::Star | Tok::Slash | Tok::Plus | Tok::EqEq | Tok::Lt
                        if *self.peek2() == Tok::RParen =>
                    {
                        let sym = match self.bump().1 {
                            Tok::Star => "*",
                            Tok::Slash => "/",
                            Tok::Plus => "+",
                            Tok::EqEq => "==",
                            Tok::Lt => "<",
                            _ => unreachable!(),
                        };
                        self.bump();
                        return Ok(Expr::new(pos, ExprKind::Var(sym.to_string())));
                    }
                    Tok::Minus if *self.peek2() == Tok::RParen => {
                        self.bump();
                        self.bump();
                        return Ok(Expr::new(pos, ExprKind::Var("-".to_string())));
                    }
                    Tok::Minus => {
                        self.bump();
                        let e = self.expr()?;
                        self.expect(&Tok::RParen, "negation")?;
                        return Ok(Expr::new(pos, ExprKind::Neg(Box::new(e))));
                    }
                    _ => {}
                }
                let first = self.expr()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let second = self.expr()?;
                    self.expect(&Tok::RParen, "pair")?;
                    Ok(Expr::new(
                        pos,
                        ExprKind::Pair(Box::new(first), Box::new(second)),
                    ))
                } else {
                    self.expect(&Tok::RParen, "parenthesized expression")?;
                    Ok(first)
                }
            }
            other => self.err(format!("expected an expression, found {}", other.describe())),
        }
    }
}

fn is_reserved(n: &str) -> bool {
    matches!(
        n,
        "let" | "in" | "if" | "then" | "else" | "case" | "of" | "do"
            | "fst" | "snd" | "div" | "mod" | "even" | "odd" | "return" | "maybe"
    )
}

// Keywords that cannot begin an atom (prefix builtins can).
fn is_reserved_nonatom(n: &str) -> bool {
    matches!(
        n,
        "let" | "in" | "if" | "then" | "else" | "case" | "of" | "do"
    )
}

/// Parses a whole module.
pub fn parse_module(source: &str) -> Result<SourceModule> {
    let toks = Lexer::new(source).lex()?;
    let mut p = Parser { toks, i: 0 };
    p.module()
}

/// Parses a single expression, used for golden terms and the canonical form.
pub fn parse_expr(source: &str) -> Result<Expr> {
    let toks = Lexer::new(source).lex()?;
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("trailing input: {}", p.peek().describe()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity_quote() {
        let m = parse_module("main = [|| \\x -> x ||]\n").unwrap();
        assert_eq!(m.defs.len(), 1);
        let body = &m.defs[0].body;
        match &body.kind {
            ExprKind::Quote(inner) => match &inner.kind {
                ExprKind::Lam(pats, b) => {
                    assert_eq!(pats.len(), 1);
                    assert!(matches!(b.kind, ExprKind::Var(ref v) if v == "x"));
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn splice_at_top_level_parses() {
        // The grammar permits it; the generation stage rejects it later.
        let m = parse_module("main = $$(f)\n").unwrap();
        assert!(matches!(m.defs[0].body.kind, ExprKind::Splice(_)));
    }

    #[test]
    fn parses_signature_and_multiline_def() {
        let src = "main :: Float -> Float\nmain =\n  [|| \\x -> x * 1.0 ||]\n";
        let m = parse_module(src).unwrap();
        assert!(m.defs[0].ascription.is_some());
    }

    #[test]
    fn parses_do_block_and_maybe_forms() {
        let src = "f = [|| \\x -> do { y <- g x ; return (1 / y) } ||]\n";
        let m = parse_module(src).unwrap();
        match &m.defs[0].body.kind {
            ExprKind::Quote(q) => match &q.kind {
                ExprKind::Lam(_, b) => assert!(matches!(b.kind, ExprKind::Do(_))),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_position_on_error() {
        let err = parse_module("main = )\n").unwrap_err();
        assert_eq!(err.code, codes::PARSE);
        let p = err.pos.unwrap();
        assert_eq!((p.line, p.col), (1, 8));
    }

    #[test]
    fn duplicate_definitions_rejected() {
        let err = parse_module("a = 1\na = 2\n").unwrap_err();
        assert_eq!(err.code, codes::DUPLICATE_DEF);
    }

    #[test]
    fn negative_literal_argument() {
        let m = parse_module("main = power (-6)\n").unwrap();
        match &m.defs[0].body.kind {
            ExprKind::App(_, arg) => assert!(matches!(arg.kind, ExprKind::Neg(_))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn operator_section_and_splice_name() {
        let m = parse_module("d = [|| $$zipVec (*) u v ||]\n").unwrap();
        match &m.defs[0].body.kind {
            ExprKind::Quote(q) => {
                // (($$zipVec (*)) u) v
                let mut e = &**q;
                let mut args = 0;
                while let ExprKind::App(f, _) = &e.kind {
                    args += 1;
                    e = f;
                }
                assert_eq!(args, 3);
                assert!(matches!(e.kind, ExprKind::Splice(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_grammar() {
        let m = parse_module("main :: Arr Float -> (Int, Float) -> Maybe Float\nmain = x\n").unwrap();
        let ty = m.defs[0].ascription.as_ref().unwrap().to_obj();
        use crate::ast::ObjType;
        assert_eq!(
            ty,
            ObjType::fun(
                ObjType::array(ObjType::FLOAT),
                ObjType::fun(
                    ObjType::prod(ObjType::INT, ObjType::FLOAT),
                    ObjType::sum(ObjType::UNIT, ObjType::FLOAT)
                )
            )
        );
    }
}
