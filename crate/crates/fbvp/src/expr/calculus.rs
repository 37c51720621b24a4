//! Symbolic differentiation, substitution, and polynomial extraction.

use crate::error::{Error, Result};

use super::build::{add, div, mul, neg, pow, sub};
use super::{BinOp, Expr, Func, Var};

/// Exact symbolic derivative of order `order >= 1` with respect to `var`.
///
/// Higher orders are iterated first derivatives, so
/// `differentiate(e, v, k) == differentiate(differentiate(e, v, 1), v, k - 1)`
/// holds structurally. Results are simplified only by dropping literal-zero
/// terms and literal-one factors.
///
/// `step` is differentiable only when its argument does not depend on
/// `var` (the derivative is then zero); otherwise the jump makes the
/// derivative leave the expression language and an error is returned.
pub fn differentiate(e: &Expr, var: Var, order: u32) -> Result<Expr> {
    assert!(order >= 1, "derivative order must be at least 1");
    let mut d = d1(e, var)?;
    for _ in 1..order {
        d = d1(&d, var)?;
    }
    Ok(d)
}

fn d1(e: &Expr, var: Var) -> Result<Expr> {
    Ok(match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if *v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(inner) => neg(d1(inner, var)?),
        Expr::Bin(op, a, b) => {
            let da = d1(a, var)?;
            let db = d1(b, var)?;
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                BinOp::Div => div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2),
                ),
            }
        }
        Expr::Pow(base, k) => {
            if *k == 0 {
                Expr::zero()
            } else {
                let db = d1(base, var)?;
                mul(
                    mul(Expr::Const(*k as f64), pow((**base).clone(), *k - 1)),
                    db,
                )
            }
        }
        Expr::Call(func, arg) => {
            let darg = d1(arg, var)?;
            match func {
                Func::Sin => mul(Expr::Call(Func::Cos, arg.clone()), darg),
                Func::Cos => mul(neg(Expr::Call(Func::Sin, arg.clone())), darg),
                Func::Exp => mul(Expr::Call(Func::Exp, arg.clone()), darg),
                Func::Step => {
                    if arg.uses_var(var) {
                        return Err(Error::StepDerivative { var });
                    }
                    Expr::zero()
                }
            }
        }
    })
}

/// Replace every occurrence of `var` with the literal `value`.
///
/// Purely structural: no simplification is applied, so the tree shape is
/// preserved modulo the substituted leaves.
pub fn substitute(e: &Expr, var: Var, value: f64) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(*c),
        Expr::Var(v) => {
            if *v == var {
                Expr::Const(value)
            } else {
                Expr::Var(*v)
            }
        }
        Expr::Neg(inner) => Expr::Neg(Box::new(substitute(inner, var, value))),
        Expr::Bin(op, a, b) => Expr::Bin(
            *op,
            Box::new(substitute(a, var, value)),
            Box::new(substitute(b, var, value)),
        ),
        Expr::Pow(base, k) => Expr::Pow(Box::new(substitute(base, var, value)), *k),
        Expr::Call(func, arg) => Expr::Call(*func, Box::new(substitute(arg, var, value))),
    }
}

/// Largest polynomial degree `polynomial_coefficients` will report.
const MAX_POLY_DEGREE: usize = 32;

/// If `e` is a polynomial in `var` (and does not mention the other
/// variable), return its monomial coefficients `c[0] + c[1] t + ...` with
/// trailing zeros trimmed. Returns `None` for transcendental or piecewise
/// expressions, division by a non-constant, or degrees above
/// `MAX_POLY_DEGREE`.
pub fn polynomial_coefficients(e: &Expr, var: Var) -> Option<Vec<f64>> {
    let other = match var {
        Var::X => Var::Y,
        Var::Y => Var::X,
    };
    if e.uses_var(other) {
        return None;
    }
    let mut c = poly(e, var)?;
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    Some(c)
}

fn poly(e: &Expr, var: Var) -> Option<Vec<f64>> {
    match e {
        Expr::Const(c) => Some(vec![*c]),
        Expr::Var(v) => {
            if *v == var {
                Some(vec![0.0, 1.0])
            } else {
                None
            }
        }
        Expr::Neg(inner) => {
            let mut c = poly(inner, var)?;
            for v in &mut c {
                *v = -*v;
            }
            Some(c)
        }
        Expr::Bin(op, a, b) => {
            let ca = poly(a, var)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    let cb = poly(b, var)?;
                    let sign = if *op == BinOp::Add { 1.0 } else { -1.0 };
                    let mut out = vec![0.0; ca.len().max(cb.len())];
                    for (i, v) in ca.iter().enumerate() {
                        out[i] += v;
                    }
                    for (i, v) in cb.iter().enumerate() {
                        out[i] += sign * v;
                    }
                    Some(out)
                }
                BinOp::Mul => {
                    let cb = poly(b, var)?;
                    poly_mul(&ca, &cb)
                }
                BinOp::Div => {
                    // only division by a nonzero constant stays polynomial
                    match poly(b, var)?.as_slice() {
                        [d] if *d != 0.0 => Some(ca.iter().map(|v| v / d).collect()),
                        _ => None,
                    }
                }
            }
        }
        Expr::Pow(base, k) => {
            let cb = poly(base, var)?;
            let mut out = vec![1.0];
            for _ in 0..*k {
                out = poly_mul(&out, &cb)?;
            }
            Some(out)
        }
        Expr::Call(_, _) => None,
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    if a.len() + b.len() > MAX_POLY_DEGREE + 2 {
        return None;
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, va) in a.iter().enumerate() {
        for (j, vb) in b.iter().enumerate() {
            out[i + j] += va * vb;
        }
    }
    Some(out)
}

/// Coefficients of `p(t + a)` given coefficients of `p(t)`: the Taylor
/// shift that rewrites a polynomial around a new anchor, computed by
/// repeated in-place Horner steps.
pub(crate) fn shift_coefficients(coeffs: &[f64], a: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            c[k] += a * c[k + 1];
        }
    }
    c
}
