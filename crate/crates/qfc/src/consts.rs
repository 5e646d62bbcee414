//! The fixed menu of object-language constants.
//!
//! Constants are always fully applied in the term representation; the
//! normalizer never unfolds them. Signatures are schematic over at most one
//! placeholder, written `a` below, which type reconstruction instantiates
//! monomorphically at each occurrence.

use crate::ast::{Base, ObjType};

/// Object-language constants. `Fix` is uninterpreted and not permitted in
/// generated C.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Lt,
    DivI,
    ModI,
    Sqrt,
    While,
    MkArr,
    LnArr,
    IxArr,
    Save,
    Fix,
}

/// Constraint carried by the signature's placeholder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placeholder {
    /// No placeholder in the signature.
    None,
    /// Placeholder ranges over Int and Float only.
    Numeric,
    /// Placeholder must instantiate to a representable type.
    Representable,
    /// Unconstrained placeholder.
    Any,
}

/// A schematic type: either a concrete object type or the placeholder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeTy {
    Hole,
    Base(Base),
    Fun(Box<SchemeTy>, Box<SchemeTy>),
    Prod(Box<SchemeTy>, Box<SchemeTy>),
    Array(Box<SchemeTy>),
}

impl SchemeTy {
    /// Instantiate the placeholder with `inst`. `inst` may be `None` only for
    /// signatures without a placeholder.
    pub fn instantiate(&self, inst: Option<&ObjType>) -> ObjType {
        match self {
            SchemeTy::Hole => inst.expect("placeholder without instantiation").clone(),
            SchemeTy::Base(b) => ObjType::Base(*b),
            SchemeTy::Fun(d, c) => ObjType::fun(d.instantiate(inst), c.instantiate(inst)),
            SchemeTy::Prod(l, r) => ObjType::prod(l.instantiate(inst), r.instantiate(inst)),
            SchemeTy::Array(e) => ObjType::array(e.instantiate(inst)),
        }
    }
}

/// Signature of a constant: name, arity, argument and result schemes, the
/// placeholder discipline, and whether the C backend accepts it.
#[derive(Clone, Debug)]
pub struct ConstSig {
    pub name: &'static str,
    pub arity: usize,
    pub args: Vec<SchemeTy>,
    pub result: SchemeTy,
    pub placeholder: Placeholder,
    pub c_permitted: bool,
}

impl ConstSig {
    pub fn arg_types(&self, inst: Option<&ObjType>) -> Vec<ObjType> {
        self.args.iter().map(|a| a.instantiate(inst)).collect()
    }

    pub fn result_type(&self, inst: Option<&ObjType>) -> ObjType {
        self.result.instantiate(inst)
    }

    /// The constant's full type `A1 -> ... -> Ak -> B` at an instantiation.
    pub fn full_type(&self, inst: Option<&ObjType>) -> ObjType {
        let mut ty = self.result_type(inst);
        for a in self.args.iter().rev() {
            ty = ObjType::fun(a.instantiate(inst), ty);
        }
        ty
    }
}

fn hole() -> SchemeTy {
    SchemeTy::Hole
}
fn base(b: Base) -> SchemeTy {
    SchemeTy::Base(b)
}
fn fun(d: SchemeTy, c: SchemeTy) -> SchemeTy {
    SchemeTy::Fun(Box::new(d), Box::new(c))
}
fn arr(e: SchemeTy) -> SchemeTy {
    SchemeTy::Array(Box::new(e))
}

impl Const {
    pub const ALL: [Const; 15] = [
        Const::Add,
        Const::Sub,
        Const::Mul,
        Const::Div,
        Const::Eq,
        Const::Lt,
        Const::DivI,
        Const::ModI,
        Const::Sqrt,
        Const::While,
        Const::MkArr,
        Const::LnArr,
        Const::IxArr,
        Const::Save,
        Const::Fix,
    ];

    pub fn signature(self) -> ConstSig {
        use Base::*;
        use Const::*;
        use Placeholder::*;
        let (name, args, result, placeholder, c_permitted) = match self {
            Add => ("+", vec![hole(), hole()], hole(), Numeric, true),
            Sub => ("-", vec![hole(), hole()], hole(), Numeric, true),
            Mul => ("*", vec![hole(), hole()], hole(), Numeric, true),
            Div => ("/", vec![hole(), hole()], hole(), Numeric, true),
            Eq => ("==", vec![hole(), hole()], base(Bool), Numeric, true),
            Lt => ("<", vec![hole(), hole()], base(Bool), Numeric, true),
            DivI => ("div", vec![base(Int), base(Int)], base(Int), None, true),
            ModI => ("mod", vec![base(Int), base(Int)], base(Int), None, true),
            Sqrt => ("sqrt", vec![base(Float)], base(Float), None, true),
            While => (
                "while",
                vec![fun(hole(), base(Bool)), fun(hole(), hole()), hole()],
                hole(),
                Representable,
                true,
            ),
            MkArr => (
                "mkArr",
                vec![base(Int), fun(base(Int), hole())],
                arr(hole()),
                Representable,
                true,
            ),
            LnArr => ("lnArr", vec![arr(hole())], base(Int), Representable, true),
            IxArr => (
                "ixArr",
                vec![arr(hole()), base(Int)],
                hole(),
                Representable,
                true,
            ),
            Save => ("save", vec![hole()], hole(), Representable, true),
            Fix => ("fix", vec![fun(hole(), hole())], hole(), Any, false),
        };
        ConstSig {
            name,
            arity: args.len(),
            args,
            result,
            placeholder,
            c_permitted,
        }
    }

    pub fn name(self) -> &'static str {
        self.signature().name
    }

    pub fn arity(self) -> usize {
        self.signature().arity
    }

    pub fn c_permitted(self) -> bool {
        self.signature().c_permitted
    }

    /// Look a constant up by its surface name.
    pub fn by_name(name: &str) -> Option<Const> {
        Const::ALL.iter().copied().find(|c| c.name() == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ObjType;

    #[test]
    fn table_names_and_arities() {
        assert_eq!(Const::by_name("while"), Some(Const::While));
        assert_eq!(Const::While.arity(), 3);
        assert_eq!(Const::MkArr.arity(), 2);
        assert_eq!(Const::Sqrt.arity(), 1);
        assert_eq!(Const::Save.arity(), 1);
        assert_eq!(Const::Fix.arity(), 1);
        assert_eq!(Const::by_name("nope"), None);
    }

    #[test]
    fn permitted_flags() {
        let permitted: Vec<&str> = Const::ALL
            .iter()
            .filter(|c| c.c_permitted())
            .map(|c| c.name())
            .collect();
        assert_eq!(
            permitted,
            vec![
                "+", "-", "*", "/", "==", "<", "div", "mod", "sqrt", "while", "mkArr", "lnArr",
                "ixArr", "save"
            ]
        );
        assert!(!Const::Fix.c_permitted());
    }

    #[test]
    fn while_full_type_at_pair_state() {
        let s = ObjType::prod(ObjType::INT, ObjType::FLOAT);
        let ty = Const::While.signature().full_type(Some(&s));
        let expected = ObjType::fun(
            ObjType::fun(s.clone(), ObjType::BOOL),
            ObjType::fun(ObjType::fun(s.clone(), s.clone()), ObjType::fun(s.clone(), s)),
        );
        assert_eq!(ty, expected);
    }
}
