//! Expression language for coefficients and boundary data.
//!
//! Expressions are bivariate functions of `x` and `y` built from real
//! literals, the binary operators `+ - * /`, integer powers `^`, unary
//! minus, and the functions `sin`, `cos`, `exp`, `step`. The grammar is
//! (EBNF):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' INT)?
//! unary  := '-' unary | atom
//! atom   := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! All binary levels are left-associative. The power operator takes a
//! nonnegative integer-literal exponent, which keeps symbolic
//! differentiation closed within the grammar. Note the grammar places
//! unary minus inside `factor`, so `-x^2` parses as `(-x)^2`; write
//! `-(x^2)` for the other reading.
//!
//! `step(t)` is 0 for `t < 0` and 1 for `t >= 0`; the value at the jump is
//! pinned to 1 so piecewise data sample deterministically.

mod calculus;
mod parser;

pub use calculus::{differentiate, polynomial_coefficients, substitute};
pub(crate) use calculus::shift_coefficients;
pub use parser::parse;

use std::fmt;

use crate::error::{Error, Result};

/// One of the two spatial variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Y => write!(f, "y"),
        }
    }
}

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Step,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Step => "step",
        }
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression AST.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power with a nonnegative literal exponent.
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn one() -> Self {
        Expr::Const(1.0)
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Evaluate at a point. Division by an exact zero is an error carrying
    /// the point; all other values (including infinities from overflow)
    /// propagate and are caught at sampling time.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(x, y)?;
                let b = b.eval(x, y)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::DivisionByZero { x, y });
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, k) => base.eval(x, y)?.powi(*k as i32),
            Expr::Call(func, arg) => {
                let t = arg.eval(x, y)?;
                match func {
                    Func::Sin => t.sin(),
                    Func::Cos => t.cos(),
                    Func::Exp => t.exp(),
                    Func::Step => {
                        if t >= 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        })
    }

    /// Whether the expression mentions `var` anywhere.
    pub fn uses_var(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.uses_var(var),
            Expr::Bin(_, a, b) => a.uses_var(var) || b.uses_var(var),
        }
    }

    /// Whether any `step(...)` argument depends on `var`.
    pub fn has_step_in(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.has_step_in(var),
            Expr::Bin(_, a, b) => a.has_step_in(var) || b.has_step_in(var),
            Expr::Call(Func::Step, arg) => arg.uses_var(var) || arg.has_step_in(var),
            Expr::Call(_, arg) => arg.has_step_in(var),
        }
    }
}

// Printing levels mirror the grammar nonterminals: 0 = expr, 1 = term,
// 2 = factor, 3 = unary, 4 = atom. A node prints bare when its own level
// is at least the level the context requires, otherwise it is wrapped in
// parentheses, which promotes it to an atom.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, _, _) => 0,
        Expr::Bin(BinOp::Mul | BinOp::Div, _, _) => 1,
        Expr::Pow(_, _) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(_, _) => 4,
    }
}

fn write_at(e: &Expr, required: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(e) < required {
        write!(f, "(")?;
        write_at(e, 0, f)?;
        return write!(f, ")");
    }
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Neg(inner) => {
            write!(f, "-")?;
            write_at(inner, 3, f)
        }
        Expr::Bin(op, a, b) => {
            let (own, sym) = match op {
                BinOp::Add => (0, "+"),
                BinOp::Sub => (0, "-"),
                BinOp::Mul => (1, "*"),
                BinOp::Div => (1, "/"),
            };
            write_at(a, own, f)?;
            write!(f, " {sym} ")?;
            write_at(b, own + 1, f)
        }
        Expr::Pow(base, k) => {
            write_at(base, 3, f)?;
            write!(f, "^{k}")
        }
        Expr::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_at(arg, 0, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    /// Canonical printer: minimal parentheses, `f64` literals in Rust's
    /// shortest round-trip form, so `parse ∘ print ∘ parse = parse`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

/// Smart constructors that eliminate literal-zero terms and literal-one
/// factors. Used when assembling derivatives and manufactured right-hand
/// sides; parsing never rewrites the input tree.
pub(crate) mod build {
    use super::{BinOp, Expr};

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            b
        } else if b.is_zero() {
            a
        } else {
            Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            a
        } else if a.is_zero() {
            neg(b)
        } else {
            Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            Expr::zero()
        } else if a.is_one() {
            b
        } else if b.is_one() {
            a
        } else {
            Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_one() {
            a
        } else {
            Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
        }
    }

    pub fn neg(a: Expr) -> Expr {
        if a.is_zero() {
            Expr::zero()
        } else {
            Expr::Neg(Box::new(a))
        }
    }

    pub fn pow(base: Expr, k: u32) -> Expr {
        match k {
            0 => Expr::one(),
            1 => base,
            _ => Expr::Pow(Box::new(base), k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        parse(src).unwrap()
    }

    #[test]
    fn parse_builds_expected_ast() {
        assert_eq!(
            p("x^2*y"),
            Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Pow(Box::new(Expr::Var(Var::X)), 2)),
                Box::new(Expr::Var(Var::Y)),
            )
        );
        assert_eq!(
            p("step(x-0.5)"),
            Expr::Call(
                Func::Step,
                Box::new(Expr::Bin(
                    BinOp::Sub,
                    Box::new(Expr::Var(Var::X)),
                    Box::new(Expr::Const(0.5)),
                )),
            )
        );
    }

    #[test]
    fn non_integer_exponent_is_rejected() {
        assert!(matches!(parse("x^y"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x^2.5"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x^-1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        let err = parse("2*z").unwrap_err();
        match err {
            Error::Parse { position, message } => {
                assert_eq!(position, 2);
                assert!(message.contains("unknown identifier"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x^2*y").eval(2.0, 3.0).unwrap(), 12.0);
        assert_eq!(p("step(x-0.5)").eval(0.25, 0.0).unwrap(), 0.0);
        assert_eq!(p("step(x-0.5)").eval(0.75, 0.0).unwrap(), 1.0);
        // the jump value itself counts as 1
        assert_eq!(p("step(x-0.5)").eval(0.5, 0.0).unwrap(), 1.0);
        assert_eq!(p("sin(x)*cos(y)").eval(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn division_by_zero_carries_the_point() {
        let e = p("1/(x-1)");
        match e.eval(1.0, 0.25).unwrap_err() {
            Error::DivisionByZero { x, y } => {
                assert_eq!(x, 1.0);
                assert_eq!(y, 0.25);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn print_round_trips_structurally() {
        for src in [
            "x^2*y",
            "step(x-0.5)",
            "1 + 2*(y-1) + 3*(y-1)^2",
            "-x^2",
            "-(x^2)",
            "x - (y - 1)",
            "x/(y+2)/3",
            "sin(x)*cos(y) - exp(x*y)",
            "2 - -x",
            "((x))",
            "0.1 + 0.2",
        ] {
            let a = p(src);
            let b = p(&a.to_string());
            assert_eq!(a, b, "round trip failed for {src}: printed {a}");
        }
    }

    #[test]
    fn grammar_puts_unary_minus_inside_power() {
        // factor := unary ('^' INT)?, so the base of ^ may carry a sign
        let e = p("-x^2");
        assert_eq!(e.eval(3.0, 0.0).unwrap(), 9.0);
        let e = p("-(x^2)");
        assert_eq!(e.eval(3.0, 0.0).unwrap(), -9.0);
    }
}
