//! Surface syntax for the two-stage language.
//!
//! One expression grammar serves both stages: quotation brackets move between
//! them. Sugar variants (`do`, Maybe forms, `Vec`, composition, sections,
//! negation) are eliminated by the desugarer; [`Expr::is_core`] checks that.

use crate::diag::Pos;

pub type Name = String;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub pos: Pos,
    pub kind: ExprKind,
}

impl Expr {
    pub fn new(pos: Pos, kind: ExprKind) -> Expr {
        Expr { pos, kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Ne => "/=",
        }
    }
}

/// Built-in prefix forms applied to a fixed number of arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    DivI,
    ModI,
    Even,
    Odd,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::DivI => "div",
            Builtin::ModI => "mod",
            Builtin::Even => "even",
            Builtin::Odd => "odd",
        }
    }
    pub fn arity(self) -> usize {
        match self {
            Builtin::DivI | Builtin::ModI => 2,
            Builtin::Even | Builtin::Odd => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(Name),
    Int(i64),
    Float(f64),
    Bool(bool),
    Unit,
    Lam(Vec<Pat>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Builtin(Builtin, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    Inl(Box<Expr>),
    Inr(Box<Expr>),
    Case {
        scrut: Box<Expr>,
        left_binder: Name,
        left: Box<Expr>,
        right_binder: Name,
        right: Box<Expr>,
    },
    Quote(Box<Expr>),
    Splice(Box<Expr>),

    // --- sugar, absent after desugaring ---
    Neg(Box<Expr>),
    Compose(Box<Expr>, Box<Expr>),
    Do(Vec<DoStmt>),
    Nothing,
    Just(Box<Expr>),
    Return(Box<Expr>),
    BindM(Box<Expr>, Box<Expr>),
    MaybeElim(Box<Expr>, Box<Expr>, Box<Expr>),
    VecCon(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DoStmt {
    Bind(Pos, Name, Expr),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pat {
    Var(Pos, Name),
    Pair(Pos, Box<Pat>, Box<Pat>),
    Vec(Pos, Name, Name),
}

impl Pat {
    pub fn pos(&self) -> Pos {
        match self {
            Pat::Var(p, _) | Pat::Pair(p, _, _) | Pat::Vec(p, _, _) => *p,
        }
    }
}

impl Expr {
    /// True when no sugar node remains anywhere, and lambdas bind plain
    /// variables only.
    pub fn is_core(&self) -> bool {
        match &self.kind {
            ExprKind::Neg(_)
            | ExprKind::Compose(_, _)
            | ExprKind::Do(_)
            | ExprKind::Nothing
            | ExprKind::Just(_)
            | ExprKind::Return(_)
            | ExprKind::BindM(_, _)
            | ExprKind::MaybeElim(_, _, _)
            | ExprKind::VecCon(_, _) => false,
            ExprKind::Var(_)
            | ExprKind::Int(_)
            | ExprKind::Float(_)
            | ExprKind::Bool(_)
            | ExprKind::Unit => true,
            ExprKind::Lam(pats, body) => {
                pats.iter().all(|p| matches!(p, Pat::Var(_, _))) && body.is_core()
            }
            ExprKind::App(a, b)
            | ExprKind::Bin(_, a, b)
            | ExprKind::Pair(a, b)
            | ExprKind::Let(_, a, b) => a.is_core() && b.is_core(),
            ExprKind::Builtin(_, args) => args.iter().all(|a| a.is_core()),
            ExprKind::If(a, b, c) => a.is_core() && b.is_core() && c.is_core(),
            ExprKind::Fst(a)
            | ExprKind::Snd(a)
            | ExprKind::Inl(a)
            | ExprKind::Inr(a)
            | ExprKind::Quote(a)
            | ExprKind::Splice(a) => a.is_core(),
            ExprKind::Case {
                scrut, left, right, ..
            } => scrut.is_core() && left.is_core() && right.is_core(),
        }
    }
}

/// A surface type expression, as written in ascriptions.
#[derive(Clone, Debug, PartialEq)]
pub enum TypeExpr {
    Bool,
    Int,
    Float,
    Unit,
    Fun(Box<TypeExpr>, Box<TypeExpr>),
    Prod(Box<TypeExpr>, Box<TypeExpr>),
    Sum(Box<TypeExpr>, Box<TypeExpr>),
    Array(Box<TypeExpr>),
    /// `Maybe t`, shorthand for `Unit + t`.
    Maybe(Box<TypeExpr>),
    /// `Vec t`, shorthand for `(Int, Int -> t)`.
    Vec(Box<TypeExpr>),
}

impl TypeExpr {
    pub fn to_obj(&self) -> crate::ast::ObjType {
        use crate::ast::ObjType;
        match self {
            TypeExpr::Bool => ObjType::BOOL,
            TypeExpr::Int => ObjType::INT,
            TypeExpr::Float => ObjType::FLOAT,
            TypeExpr::Unit => ObjType::UNIT,
            TypeExpr::Fun(a, b) => ObjType::fun(a.to_obj(), b.to_obj()),
            TypeExpr::Prod(a, b) => ObjType::prod(a.to_obj(), b.to_obj()),
            TypeExpr::Sum(a, b) => ObjType::sum(a.to_obj(), b.to_obj()),
            TypeExpr::Array(e) => ObjType::array(e.to_obj()),
            TypeExpr::Maybe(t) => ObjType::sum(ObjType::UNIT, t.to_obj()),
            TypeExpr::Vec(t) => ObjType::prod(
                ObjType::INT,
                ObjType::fun(ObjType::INT, t.to_obj()),
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Def {
    pub pos: Pos,
    pub name: Name,
    pub ascription: Option<TypeExpr>,
    pub body: Expr,
}

#[derive(Clone, Debug)]
pub struct SourceModule {
    pub defs: Vec<Def>,
    pub entry: Name,
}

impl SourceModule {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }
}
