//! Lowered imperative program: declarations, statements, and pure
//! expressions, ready for text emission.

/// Scalar and array C types used by lowered code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CScalar {
    Bool,
    Int32,
    Float,
}

impl CScalar {
    pub fn c_name(self) -> &'static str {
        match self {
            CScalar::Bool => "bool",
            CScalar::Int32 => "int32_t",
            CScalar::Float => "float",
        }
    }

    pub fn arr_name(self) -> &'static str {
        match self {
            CScalar::Bool => "qf_arr_bool",
            CScalar::Int32 => "qf_arr_int",
            CScalar::Float => "qf_arr_float",
        }
    }

    pub fn alloc_name(self) -> &'static str {
        match self {
            CScalar::Bool => "qf_alloc_bool",
            CScalar::Int32 => "qf_alloc_int",
            CScalar::Float => "qf_alloc_float",
        }
    }

    pub fn ix_name(self) -> &'static str {
        match self {
            CScalar::Bool => "qf_ix_bool",
            CScalar::Int32 => "qf_ix_int",
            CScalar::Float => "qf_ix_float",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CType {
    Scalar(CScalar),
    Arr(CScalar),
}

impl CType {
    pub fn c_name(self) -> &'static str {
        match self {
            CType::Scalar(s) => s.c_name(),
            CType::Arr(e) => e.arr_name(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CBinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Lt,
}

impl CBinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CBinOp::Add => "+",
            CBinOp::Sub => "-",
            CBinOp::Mul => "*",
            CBinOp::Div => "/",
            CBinOp::Mod => "%",
            CBinOp::Eq => "==",
            CBinOp::Lt => "<",
        }
    }
}

/// Pure expressions; all effects happen through statements.
#[derive(Clone, Debug, PartialEq)]
pub enum CExpr {
    Var(String),
    Int(i32),
    Float(f64),
    Bool(bool),
    Bin(CBinOp, Box<CExpr>, Box<CExpr>),
    Not(Box<CExpr>),
    Ternary(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    /// `sqrtf(e)`
    Sqrtf(Box<CExpr>),
    /// `(int32_t)(a).len`
    LenOf(Box<CExpr>),
    /// `qf_ix_<t>(a, i)`
    Index(CScalar, Box<CExpr>, Box<CExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CStmt {
    /// `x = e;`
    Assign(String, CExpr),
    /// `x = qf_alloc_<t>(n);`
    AllocArr(String, CScalar, CExpr),
    /// `x.data[i] = e;`
    StoreArr(String, CExpr, CExpr),
    If {
        cond: CExpr,
        then: Vec<CStmt>,
        els: Vec<CStmt>,
    },
    /// `while (cond) { body }`
    While { cond: CExpr, body: Vec<CStmt> },
    /// `while (1) { pre; if (!(cond)) break; body }`
    Loop {
        pre: Vec<CStmt>,
        cond: CExpr,
        body: Vec<CStmt>,
    },
    /// `for (var = 0; var < bound; var++) { body }`
    For {
        var: String,
        bound: CExpr,
        body: Vec<CStmt>,
    },
}

#[derive(Clone, Debug)]
pub struct CFunction {
    pub name: String,
    pub params: Vec<(CType, String)>,
    pub decls: Vec<(CType, String)>,
    pub body: Vec<CStmt>,
    /// Leaf variables holding the result, with their types. A single leaf
    /// returns directly; multiple leaves return through a per-function
    /// result struct.
    pub result: Vec<(CType, String)>,
}

/// A lowered translation unit: the fixed runtime include plus one entry
/// function.
#[derive(Clone, Debug)]
pub struct CUnit {
    pub includes: Vec<String>,
    pub function: CFunction,
}
