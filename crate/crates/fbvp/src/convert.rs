//! Exact two-way conversion between classical and non-classical boundary
//! data, and the agreement-condition checker.
//!
//! Classical data are six functions on the far faces: `phi_1..phi_4` (the
//! traces of `u, D_x u, D_x^2 u, D_x^3 u` on `x = h1`) and `psi_1, psi_2`
//! (the traces of `u, D_y u` on `y = h2`). They admit a solution only
//! when eight corner equalities hold at `(h1, h2)`:
//!
//! ```text
//! psi_1(h1)    = phi_1(h2)    psi_2(h1)    = phi_1'(h2)
//! psi_1'(h1)   = phi_2(h2)    psi_2'(h1)   = phi_2'(h2)
//! psi_1''(h1)  = phi_3(h2)    psi_2''(h1)  = phi_3'(h2)
//! psi_1'''(h1) = phi_4(h2)    psi_2'''(h1) = phi_4'(h2)
//! ```
//!
//! Non-classical data (corner scalars plus edge traces) carry the same
//! information with no side conditions: the classical functions rebuilt
//! from them,
//!
//! ```text
//! phi_{i+1}(y) = Z_i0 + (y - h2) Z_i1 + int_{h2}^y (y - s) Z_i2(s) ds
//! psi_{j+1}(x) = sum_{m=0..3} (x - h1)^m/m! Z_mj
//!                + int_{h1}^x (x - t)^3/3! Z4j(t) dt
//! ```
//!
//! satisfy the agreement conditions automatically, which makes these
//! formulas the general form of all agreeing classical data.

use crate::domain::{BoundaryFn, ClassicalData, Grid, NonClassicalData, ProblemSpec};
use crate::error::{Error, Result};
use crate::expr::{
    build, differentiate, polynomial_coefficients, shift_coefficients, Expr, Var,
};
use crate::solver::weighted_cumulative_integral;

const INV_FACTORIAL: [f64; 4] = [1.0, 1.0, 0.5, 1.0 / 6.0];

/// One line of the agreement table: a `psi`-side value at `h1`, the
/// matching `phi`-side value at `h2`, and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementEntry {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Residuals of the eight agreement conditions, in the fixed order
/// `psi_1(h1)-phi_1(h2), psi_2(h1)-phi_1'(h2), psi_1'(h1)-phi_2(h2), ...`
/// alternating the two `psi` functions while the derivative order climbs.
#[derive(Debug, Clone)]
pub struct AgreementReport {
    pub entries: [AgreementEntry; 8],
    pub max_abs: f64,
}

impl AgreementReport {
    pub fn residuals(&self) -> [f64; 8] {
        std::array::from_fn(|k| self.entries[k].residual)
    }
}

fn require_expr<'a>(f: &'a BoundaryFn, name: &str) -> Result<&'a Expr> {
    f.as_expr().ok_or_else(|| {
        Error::Data(format!(
            "{name} is sampled data; symbolic differentiation needs a closed-form expression"
        ))
    })
}

/// Evaluate the eight agreement residuals by symbolic differentiation and
/// pointwise evaluation at the final corner.
pub fn check_agreement(cd: &ClassicalData, spec: &ProblemSpec) -> Result<AgreementReport> {
    let problems = cd.validate();
    if !problems.is_empty() {
        return Err(Error::Data(problems.join("; ")));
    }
    let (h1, h2) = (spec.h1, spec.h2);

    // psi-side: derivative orders 0..=3 of each psi at x = h1
    let mut lhs = [[0.0_f64; 4]; 2];
    for (jj, psi) in cd.psi.iter().enumerate() {
        let e = require_expr(psi, &format!("psi{}", jj + 1))?;
        let mut d = e.clone();
        for (order, slot) in lhs[jj].iter_mut().enumerate() {
            if order > 0 {
                d = differentiate(&d, Var::X, 1)?;
            }
            *slot = d.eval(h1, h2)?;
        }
    }

    // phi-side: value and first y-derivative of each phi at y = h2
    let mut rhs = [[0.0_f64; 2]; 4];
    for (i, phi) in cd.phi.iter().enumerate() {
        let e = require_expr(phi, &format!("phi{}", i + 1))?;
        rhs[i][0] = e.eval(h1, h2)?;
        rhs[i][1] = differentiate(e, Var::Y, 1)?.eval(h1, h2)?;
    }

    let entries = std::array::from_fn(|k| {
        let order = k / 2; // derivative order on the psi side
        let jj = k % 2; // which psi / which phi column
        let l = lhs[jj][order];
        let r = rhs[order][jj];
        AgreementEntry {
            lhs: l,
            rhs: r,
            residual: l - r,
        }
    });
    let max_abs = entries
        .iter()
        .fold(0.0_f64, |m, e: &AgreementEntry| m.max(e.residual.abs()));
    Ok(AgreementReport { entries, max_abs })
}

/// Derive the corner scalars and edge traces from classical data.
///
/// Corner values are taken from the `phi` side of each equality
/// (`Z_ij = phi_{i+1}^{(j)}(h2)`); the `psi`-side candidates are not
/// averaged in, so the map stays well defined on non-agreeing data and
/// the disagreement is reported separately by [`check_agreement`].
/// Edge traces are `Z_4j = psi_{j+1}''''` and `Z_i2 = phi_{i+1}''`,
/// kept as closed-form expressions.
pub fn classical_to_nonclassical(
    cd: &ClassicalData,
    spec: &ProblemSpec,
) -> Result<NonClassicalData> {
    let problems = cd.validate();
    if !problems.is_empty() {
        return Err(Error::Data(problems.join("; ")));
    }
    let (h1, h2) = (spec.h1, spec.h2);
    let mut nc = NonClassicalData::zero();

    for (i, phi) in cd.phi.iter().enumerate() {
        let e = require_expr(phi, &format!("phi{}", i + 1))?;
        nc.corner[i][0] = e.eval(h1, h2)?;
        let d1 = differentiate(e, Var::Y, 1)?;
        nc.corner[i][1] = d1.eval(h1, h2)?;
        nc.yedge[i] = BoundaryFn::Expr(differentiate(&d1, Var::Y, 1)?);
    }
    for (jj, psi) in cd.psi.iter().enumerate() {
        let e = require_expr(psi, &format!("psi{}", jj + 1))?;
        nc.xedge[jj] = BoundaryFn::Expr(differentiate(e, Var::X, 4)?);
    }
    Ok(nc)
}

/// Polynomial `sum c_k (t - anchor)^k` as an expression, with zero terms
/// dropped. Keeping the anchored form makes corner evaluation exact.
fn anchored_polynomial(var: Var, anchor: f64, terms: &[(f64, u32)]) -> Expr {
    let mut acc = Expr::zero();
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let base = build::sub(Expr::Var(var), Expr::Const(anchor));
        acc = build::add(acc, build::mul(Expr::Const(c), build::pow(base, k)));
    }
    acc
}

/// Edge function as shifted polynomial coefficients about `anchor`, when
/// it is a closed-form polynomial.
fn shifted_poly(f: &BoundaryFn, var: Var, anchor: f64) -> Option<Vec<f64>> {
    let coeffs = polynomial_coefficients(f.as_expr()?, var)?;
    Some(shift_coefficients(&coeffs, anchor))
}

/// Rebuild the six classical functions from corner/edge data.
///
/// Polynomial edge data integrate exactly: the result is a closed-form
/// anchored polynomial and the whole round trip stays at machine
/// precision. Other edge data fall back to the signed cumulative
/// trapezoid rule on `grid`, yielding sampled functions.
pub fn nonclassical_to_classical(
    nc: &NonClassicalData,
    spec: &ProblemSpec,
    grid: &Grid,
) -> Result<ClassicalData> {
    let problems = nc.validate();
    if !problems.is_empty() {
        return Err(Error::Data(problems.join("; ")));
    }
    let (h1, h2) = (spec.h1, spec.h2);
    let mut cd = ClassicalData::zero();

    for i in 0..4 {
        cd.phi[i] = match shifted_poly(&nc.yedge[i], Var::Y, h2) {
            Some(b) => {
                // int_{h2}^y (y - s) p(s) ds is the twice-anchored
                // antiderivative: b_s -> b_s/((s+1)(s+2)) at power s + 2
                let mut terms = vec![(nc.corner[i][0], 0), (nc.corner[i][1], 1)];
                for (s, &bs) in b.iter().enumerate() {
                    let denom = ((s + 1) * (s + 2)) as f64;
                    terms.push((bs / denom, (s + 2) as u32));
                }
                BoundaryFn::Expr(anchored_polynomial(Var::Y, h2, &terms))
            }
            None => {
                let nodes = grid.y_nodes();
                let samples = nc.yedge[i].sample(nodes, Var::Y, h1)?;
                let integral = weighted_cumulative_integral(&samples, 1, nodes);
                let values = nodes
                    .iter()
                    .zip(&integral)
                    .map(|(&y, &g)| nc.corner[i][0] + (y - h2) * nc.corner[i][1] + g)
                    .collect();
                BoundaryFn::Samples(values)
            }
        };
    }

    for jj in 0..2 {
        cd.psi[jj] = match shifted_poly(&nc.xedge[jj], Var::X, h1) {
            Some(b) => {
                // four-fold anchored antiderivative of the edge trace
                let mut terms: Vec<(f64, u32)> = (0..=3)
                    .map(|m| (nc.corner[m][jj] * INV_FACTORIAL[m], m as u32))
                    .collect();
                for (s, &bs) in b.iter().enumerate() {
                    let denom = ((s + 1) * (s + 2) * (s + 3) * (s + 4)) as f64;
                    terms.push((bs / denom, (s + 4) as u32));
                }
                BoundaryFn::Expr(anchored_polynomial(Var::X, h1, &terms))
            }
            None => {
                let nodes = grid.x_nodes();
                let samples = nc.xedge[jj].sample(nodes, Var::X, h2)?;
                let integral = weighted_cumulative_integral(&samples, 3, nodes);
                let values = nodes
                    .iter()
                    .zip(&integral)
                    .map(|(&x, &g)| {
                        let mut s = g;
                        for m in 0..=3usize {
                            s += (x - h1).powi(m as i32)
                                * INV_FACTORIAL[m]
                                * nc.corner[m][jj];
                        }
                        s
                    })
                    .collect();
                BoundaryFn::Samples(values)
            }
        };
    }
    Ok(cd)
}
