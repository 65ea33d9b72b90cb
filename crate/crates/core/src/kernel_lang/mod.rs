//! Expression language for kernel functions.
//!
//! Kernels are written over the four slot variables `t, s, u, v`:
//!
//! | slot        | signature      |
//! |-------------|----------------|
//! | `k0`        | `(t, u)`       |
//! | `k1`        | `(t, s, v)`    |
//! | `k2`        | `(t, s, u, v)` |
//! | Young `Φ`   | `(t, u)`       |
//!
//! Grammar (highest precedence first): `^` (right associative), unary `-`,
//! `* /`, `+ -` (left associative). Calls: `sin cos exp ln abs` with one
//! argument, `pow(a, b)` with two. Named constants: `pi`, `inf`.

mod diff;
mod parser;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use diff::{diff_expr, DiffError};
pub use parser::{parse_expr, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    S,
    U,
    V,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::T, Var::S, Var::U, Var::V];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::S => "s",
            Var::U => "u",
            Var::V => "v",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "s" => Some(Var::S),
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// A set of declared variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub const K0: VarSet = VarSet::of(&[Var::T, Var::U]);
    pub const K1: VarSet = VarSet::of(&[Var::T, Var::S, Var::V]);
    pub const K2: VarSet = VarSet::of(&[Var::T, Var::S, Var::U, Var::V]);
    pub const YOUNG: VarSet = VarSet::of(&[Var::T, Var::U]);
    pub const T_ONLY: VarSet = VarSet::of(&[Var::T]);

    pub const fn of(vars: &[Var]) -> VarSet {
        let mut bits = 0u8;
        let mut i = 0;
        while i < vars.len() {
            bits |= 1 << (vars[i] as u8);
            i += 1;
        }
        VarSet(bits)
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.slot()) != 0
    }

    pub fn names(self) -> Vec<&'static str> {
        Var::ALL
            .iter()
            .filter(|v| self.contains(**v))
            .map(|v| v.name())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Abs => "abs",
        }
    }

    pub(crate) fn from_function(name: &str) -> Option<UnaryOp> {
        match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "ln" => Some(UnaryOp::Ln),
            "abs" => Some(UnaryOp::Abs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error in {op}({arg})")]
    Domain { op: &'static str, arg: String },
    #[error("result is not a number")]
    NotANumber,
}

/// Values for the four slot variables, indexed by [`Var`].
pub type Slots = [f64; 4];

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Variables occurring in the expression.
    pub fn vars(&self) -> VarSet {
        let mut bits = 0u8;
        self.visit_vars(&mut |v| bits |= 1 << v.slot());
        VarSet(bits)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.vars().contains(v)
    }

    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Unary(_, a) => a.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Evaluate with slot-indexed bindings. Unused slots are ignored.
    pub fn eval_slots(&self, slots: &Slots) -> Result<f64, EvalError> {
        let r = self.eval_inner(slots)?;
        if r.is_nan() {
            return Err(EvalError::NotANumber);
        }
        Ok(r)
    }

    fn eval_inner(&self, slots: &Slots) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => slots[v.slot()],
            Expr::Unary(op, a) => apply_unary(*op, a.eval_inner(slots)?)?,
            Expr::Binary(op, a, b) => {
                apply_binary(*op, a.eval_inner(slots)?, b.eval_inner(slots)?)?
            }
        })
    }

    /// Evaluate with named bindings; every variable in the expression must be bound.
    pub fn eval(&self, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let mut slots = [f64::NAN; 4];
        for v in Var::ALL {
            if self.depends_on(v) {
                slots[v.slot()] = *bindings
                    .get(v.name())
                    .ok_or_else(|| EvalError::MissingBinding(v.name().to_string()))?;
            }
        }
        self.eval_slots(&slots)
    }

    /// Fold constant subtrees and apply the neutral-element identities
    /// (`x+0`, `x*1`, `x*0`, `x^1`, `x^0`, `--x`). Subtrees whose folding
    /// would raise an evaluation error are left in place.
    pub fn fold_constants(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => simplify_unary(*op, a.fold_constants()),
            Expr::Binary(op, a, b) => simplify_binary(*op, a.fold_constants(), b.fold_constants()),
        }
    }
}

/// Free-function form of [`Expr::eval`].
pub fn eval_expr(e: &Expr, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
    e.eval(bindings)
}

fn apply_unary(op: UnaryOp, x: f64) -> Result<f64, EvalError> {
    Ok(match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Abs => x.abs(),
        UnaryOp::Ln => {
            if x > 0.0 {
                x.ln()
            } else {
                return Err(EvalError::Domain {
                    op: "ln",
                    arg: x.to_string(),
                });
            }
        }
    })
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, EvalError> {
    Ok(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            a / b
        }
        BinaryOp::Pow => {
            let integral = b.is_finite() && b.fract() == 0.0;
            if a < 0.0 && !integral {
                return Err(EvalError::Domain {
                    op: "pow",
                    arg: format!("{a}, {b}"),
                });
            }
            if a == 0.0 && b < 0.0 {
                return Err(EvalError::Domain {
                    op: "pow",
                    arg: format!("{a}, {b}"),
                });
            }
            a.powf(b)
        }
    })
}

pub(crate) fn simplify_unary(op: UnaryOp, a: Expr) -> Expr {
    if let Expr::Const(c) = a {
        if let Ok(r) = apply_unary(op, c) {
            if !r.is_nan() {
                return Expr::Const(r);
            }
        }
    }
    if op == UnaryOp::Neg {
        if let Expr::Unary(UnaryOp::Neg, inner) = a {
            return *inner;
        }
    }
    Expr::unary(op, a)
}

pub(crate) fn simplify_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        if let Ok(r) = apply_binary(op, *x, *y) {
            if !r.is_nan() {
                return Expr::Const(r);
            }
        }
    }
    let ca = a.as_const();
    let cb = b.as_const();
    match op {
        BinaryOp::Add => {
            if ca == Some(0.0) {
                return b;
            }
            if cb == Some(0.0) {
                return a;
            }
        }
        BinaryOp::Sub => {
            if cb == Some(0.0) {
                return a;
            }
            if ca == Some(0.0) {
                return simplify_unary(UnaryOp::Neg, b);
            }
        }
        BinaryOp::Mul => {
            if ca == Some(0.0) || cb == Some(0.0) {
                return Expr::Const(0.0);
            }
            if ca == Some(1.0) {
                return b;
            }
            if cb == Some(1.0) {
                return a;
            }
            if ca == Some(-1.0) {
                return simplify_unary(UnaryOp::Neg, b);
            }
            if cb == Some(-1.0) {
                return simplify_unary(UnaryOp::Neg, a);
            }
        }
        BinaryOp::Div => {
            if cb == Some(1.0) {
                return a;
            }
        }
        BinaryOp::Pow => {
            if cb == Some(1.0) {
                return a;
            }
            if cb == Some(0.0) {
                return Expr::Const(1.0);
            }
        }
    }
    Expr::binary(op, a, b)
}

// Printing: parenthesise whenever the tree shape would otherwise be lost, so
// that parsing the output reproduces the tree.
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if *c < 0.0 => PREC_ATOM, // printed parenthesised
        Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_UNARY,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(op, ..) => op.precedence(),
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c == f64::INFINITY {
        write!(f, "inf")
    } else if c == f64::NEG_INFINITY {
        write!(f, "(-inf)")
    } else if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                // `-x^2` already parses as `-(x^2)`; anything looser needs parens.
                write_child(f, a, precedence(a) < PREC_UNARY)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let (pa, pb) = (precedence(a), precedence(b));
                let (left_parens, right_parens) = if *op == BinaryOp::Pow {
                    // Right associative; the base must be an atom.
                    (pa < PREC_ATOM, pb < PREC_UNARY)
                } else {
                    (pa < p, pb <= p)
                };
                write_child(f, a, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, right_parens)
            }
        }
    }
}

/// The kernel functions of `G(x1, x2) = K0(x1) + K1(x2) + K2(x1, x2)`.
/// An absent slot contributes zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelSpec {
    pub k0: Option<Expr>,
    pub k1: Option<Expr>,
    pub k2: Option<Expr>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelSpecError {
    #[error("at least one kernel slot must be present")]
    Empty,
    #[error("kernel {slot} uses `{var}`, which is not in its signature ({allowed})")]
    SlotVariable {
        slot: &'static str,
        var: &'static str,
        allowed: String,
    },
    #[error("kernel {slot}: {source}")]
    Parse {
        slot: &'static str,
        #[source]
        source: ParseError,
    },
}

impl KernelSpec {
    pub fn new(k0: Option<Expr>, k1: Option<Expr>, k2: Option<Expr>) -> Result<Self, KernelSpecError> {
        let spec = KernelSpec { k0, k1, k2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Parse each present slot under its own signature.
    pub fn parse(k0: Option<&str>, k1: Option<&str>, k2: Option<&str>) -> Result<Self, KernelSpecError> {
        let p = |slot: &'static str, text: Option<&str>, vars: VarSet| {
            text.map(|t| parse_expr(t, vars).map_err(|source| KernelSpecError::Parse { slot, source }))
                .transpose()
        };
        KernelSpec::new(
            p("k0", k0, VarSet::K0)?,
            p("k1", k1, VarSet::K1)?,
            p("k2", k2, VarSet::K2)?,
        )
    }

    pub fn validate(&self) -> Result<(), KernelSpecError> {
        if self.k0.is_none() && self.k1.is_none() && self.k2.is_none() {
            return Err(KernelSpecError::Empty);
        }
        for (slot, e, allowed) in self.slots() {
            if let Some(e) = e {
                let used = e.vars();
                for v in Var::ALL {
                    if used.contains(v) && !allowed.contains(v) {
                        return Err(KernelSpecError::SlotVariable {
                            slot,
                            var: v.name(),
                            allowed: allowed.names().join(", "),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn slots(&self) -> [(&'static str, Option<&Expr>, VarSet); 3] {
        [
            ("k0", self.k0.as_ref(), VarSet::K0),
            ("k1", self.k1.as_ref(), VarSet::K1),
            ("k2", self.k2.as_ref(), VarSet::K2),
        ]
    }
}
