use thiserror::Error;

use super::{simplify_binary as bin, simplify_unary as un, BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("abs({arg}) is not differentiable with respect to `{var}`")]
    NonDifferentiable { arg: String, var: &'static str },
}

/// Symbolic partial derivative of `e` with respect to `var`, with constants
/// folded. `abs` of a subexpression depending on `var` is rejected.
pub fn diff_expr(e: &Expr, var: Var) -> Result<Expr, DiffError> {
    Ok(d(e, var)?.fold_constants())
}

fn c(x: f64) -> Expr {
    Expr::Const(x)
}

fn d(e: &Expr, x: Var) -> Result<Expr, DiffError> {
    if !e.depends_on(x) {
        return Ok(c(0.0));
    }
    Ok(match e {
        Expr::Const(_) => c(0.0),
        Expr::Var(v) => c(if *v == x { 1.0 } else { 0.0 }),
        Expr::Unary(op, a) => {
            let da = d(a, x)?;
            let a = (**a).clone();
            match op {
                UnaryOp::Neg => un(UnaryOp::Neg, da),
                UnaryOp::Sin => bin(BinaryOp::Mul, un(UnaryOp::Cos, a), da),
                UnaryOp::Cos => bin(BinaryOp::Mul, un(UnaryOp::Neg, un(UnaryOp::Sin, a)), da),
                UnaryOp::Exp => bin(BinaryOp::Mul, un(UnaryOp::Exp, a), da),
                UnaryOp::Ln => bin(BinaryOp::Div, da, a),
                UnaryOp::Abs => {
                    return Err(DiffError::NonDifferentiable {
                        arg: a.to_string(),
                        var: x.name(),
                    })
                }
            }
        }
        Expr::Binary(op, a, b) => {
            let (da, db) = (d(a, x)?, d(b, x)?);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => bin(BinaryOp::Add, da, db),
                BinaryOp::Sub => bin(BinaryOp::Sub, da, db),
                BinaryOp::Mul => bin(
                    BinaryOp::Add,
                    bin(BinaryOp::Mul, da, b.clone()),
                    bin(BinaryOp::Mul, a, db),
                ),
                BinaryOp::Div => bin(
                    BinaryOp::Div,
                    bin(
                        BinaryOp::Sub,
                        bin(BinaryOp::Mul, da, b.clone()),
                        bin(BinaryOp::Mul, a, db),
                    ),
                    bin(BinaryOp::Pow, b, c(2.0)),
                ),
                BinaryOp::Pow => {
                    if !b.depends_on(x) {
                        // b * a^(b-1) * a'
                        let reduced = bin(BinaryOp::Sub, b.clone(), c(1.0));
                        bin(
                            BinaryOp::Mul,
                            bin(BinaryOp::Mul, b, bin(BinaryOp::Pow, a, reduced)),
                            da,
                        )
                    } else if !a.depends_on(x) {
                        // a^b * ln(a) * b'
                        bin(
                            BinaryOp::Mul,
                            bin(
                                BinaryOp::Mul,
                                bin(BinaryOp::Pow, a.clone(), b),
                                un(UnaryOp::Ln, a),
                            ),
                            db,
                        )
                    } else {
                        // a^b * (b' ln a + b a'/a)
                        bin(
                            BinaryOp::Mul,
                            bin(BinaryOp::Pow, a.clone(), b.clone()),
                            bin(
                                BinaryOp::Add,
                                bin(BinaryOp::Mul, db, un(UnaryOp::Ln, a.clone())),
                                bin(BinaryOp::Div, bin(BinaryOp::Mul, b, da), a),
                            ),
                        )
                    }
                }
            }
        }
    })
}
