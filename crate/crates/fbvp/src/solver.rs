//! Quadrature primitives and the Picard fixed-point solver.
//!
//! With every derivative field expressed through the top derivative
//! `v = D_x^4 D_y^2 u` (see [`crate::taylor`]), the equation becomes a
//! second-kind Volterra-type integral equation
//!
//! ```text
//! v(x, y) + (L v)(x, y) = z(x, y),
//! ```
//!
//! where `L` collects the lower-order coefficient terms and integrates
//! `v` only over the sub-rectangle `[x, h1] x [y, h2]`. On a bounded
//! domain with bounded coefficients the Neumann series converges, and the
//! solver runs plain successive substitution `v <- z - L v` starting from
//! zero, stopping on the sup-norm of the update.

use crate::domain::{
    all_deriv_indices, validate_spec, DerivIndex, Exponent, Grid, GridFunction, NonClassicalData,
    ProblemSpec, SolutionField,
};
use crate::error::{Error, Result};
use crate::taylor::Reconstructor;

/// Stopping parameters for the Picard iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Sup-norm threshold on the Picard update.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Data(format!(
                "solver tolerance must be positive (got {})",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Data("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

const BINOMIAL: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

const INV_FACTORIAL: [f64; 4] = [1.0, 1.0, 0.5, 1.0 / 6.0];

/// Cumulative kernel-weighted integrals anchored at the *last* node:
///
/// ```text
/// g(x_m) = integral from anchor to x_m of ((x_m - t)^k / k!) f(t) dt,
/// ```
///
/// with `anchor = nodes.last()`, so `g(anchor) = 0` and the integrals are
/// oriented (nodes left of the anchor get the backward orientation
/// automatically).
///
/// The rule is the composite product-trapezoid: the kernel is evaluated
/// exactly at the nodes and `f` enters through its piecewise-linear
/// interpolant. Rather than re-summing per output node, the kernel is
/// expanded binomially about the anchor, which turns the whole family
/// into `k + 1` plain cumulative trapezoid sums (`O(k n)` total) that are
/// algebraically identical to the direct `O(n^2)` evaluation. The sums
/// run from the anchor leftward, so `g(x_m)` depends only on `f` over
/// `[x_m, anchor]`.
pub fn weighted_cumulative_integral(f: &[f64], k: usize, nodes: &[f64]) -> Vec<f64> {
    assert!(k <= 3, "kernel power must be in 0..=3");
    assert_eq!(f.len(), nodes.len(), "f and nodes must have equal length");
    let n = nodes.len();
    assert!(n >= 2, "need at least two nodes");
    let anchor = nodes[n - 1];

    // moments m_q(x) = integral from anchor to x of (t - anchor)^q f(t) dt
    let mut moments: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    for q in 0..=k {
        let w: Vec<f64> = nodes
            .iter()
            .zip(f)
            .map(|(&t, &ft)| (t - anchor).powi(q as i32) * ft)
            .collect();
        let mut m = vec![0.0; n];
        for idx in (0..n - 1).rev() {
            m[idx] = m[idx + 1] - 0.5 * (nodes[idx + 1] - nodes[idx]) * (w[idx] + w[idx + 1]);
        }
        moments.push(m);
    }

    // (x - t)^k = sum_q C(k, q) (x - anchor)^(k-q) (-(t - anchor))^q
    let mut g = vec![0.0; n];
    for (idx, out) in g.iter_mut().enumerate() {
        let xr = nodes[idx] - anchor;
        let mut acc = 0.0;
        for (q, m) in moments.iter().enumerate() {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * BINOMIAL[k][q] * xr.powi((k - q) as i32) * m[idx];
        }
        *out = INV_FACTORIAL[k] * acc;
    }
    g
}

fn sample_coefficients(spec: &ProblemSpec, grid: &Grid) -> Result<Vec<(DerivIndex, GridFunction)>> {
    spec.coeffs
        .iter()
        .map(|(&idx, e)| Ok((idx, grid.sample(e)?)))
        .collect()
}

fn lower_order_sum(
    coeffs: &[(DerivIndex, GridFunction)],
    recon: &Reconstructor,
    v: &GridFunction,
) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(v.nx(), v.ny());
    for ((i, j), a) in coeffs {
        let field = recon.reconstruct(*i, *j, v)?;
        for iy in 0..v.ny() {
            for ix in 0..v.nx() {
                acc.set(ix, iy, acc.at(ix, iy) + a.at(ix, iy) * field.at(ix, iy));
            }
        }
    }
    Ok(acc)
}

/// Evaluate the lower-order part of the operator on a candidate top
/// derivative: `(L v)(x, y) = sum a_ij(x, y) * (D_x^i D_y^j u)(x, y)`
/// where each derivative is reconstructed from `v` and the boundary data.
pub fn apply_operator(
    spec: &ProblemSpec,
    v: &GridFunction,
    nc: &NonClassicalData,
    grid: &Grid,
) -> Result<GridFunction> {
    if !v.matches(grid) {
        return Err(Error::Data("field shape does not match the grid".into()));
    }
    let coeffs = sample_coefficients(spec, grid)?;
    let recon = Reconstructor::new(nc, grid)?;
    lower_order_sum(&coeffs, &recon, v)
}

/// Solve the corner/edge-data problem by Picard iteration on the
/// Volterra form, then reconstruct all 15 derivative fields.
///
/// Starts from `v = 0` (so the first iterate is the pure Taylor part) and
/// repeats `v <- z - L v` until the sup-norm update drops below
/// `cfg.tol`, failing with the update history once `cfg.max_iter` is
/// reached or the iterates stop being finite.
pub fn picard_solve(
    spec: &ProblemSpec,
    nc: &NonClassicalData,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<SolutionField> {
    let report = validate_spec(spec);
    if !report.is_valid() {
        return Err(Error::InvalidSpec {
            violations: report.violations,
        });
    }
    cfg.validate()?;

    let rhs = grid.sample(&spec.rhs)?;
    let coeffs = sample_coefficients(spec, grid)?;
    let recon = Reconstructor::new(nc, grid)?;

    let (nx, ny) = (grid.nx(), grid.ny());
    let mut v = GridFunction::zeros(nx, ny);
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iter {
        let lv = lower_order_sum(&coeffs, &recon, &v)?;
        let mut vnew = GridFunction::zeros(nx, ny);
        let mut update = 0.0_f64;
        for iy in 0..ny {
            for ix in 0..nx {
                let next = rhs.at(ix, iy) - lv.at(ix, iy);
                vnew.set(ix, iy, next);
                update = update.max((next - v.at(ix, iy)).abs());
            }
        }
        history.push(update);
        if !update.is_finite() || !vnew.is_finite() {
            return Err(Error::Divergence { iteration, history });
        }
        v = vnew;
        if update < cfg.tol {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::NonConvergence {
            iterations: cfg.max_iter,
            tol: cfg.tol,
            history,
        });
    }

    let final_update = history.last().copied().unwrap_or(0.0);
    let iterations = history.len();
    let mut derivs = std::collections::BTreeMap::new();
    for (i, j) in all_deriv_indices() {
        let field = if (i, j) == (4, 2) {
            v.clone()
        } else {
            recon.reconstruct(i, j, &v)?
        };
        derivs.insert((i, j), field);
    }
    Ok(SolutionField {
        derivs,
        iterations,
        final_update,
    })
}

/// Discrete norm of the defect `v + L v - z` over the interior nodes,
/// using the solution's own reconstructed derivative fields. The norm is
/// the discrete `L_p` norm for finite `p` and the max-norm for `p = inf`.
pub fn residual_norm(spec: &ProblemSpec, sol: &SolutionField, grid: &Grid) -> Result<f64> {
    let rhs = grid.sample(&spec.rhs)?;
    let coeffs = sample_coefficients(spec, grid)?;
    let v = sol.v();
    if !v.matches(grid) {
        return Err(Error::Data("solution shape does not match the grid".into()));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let cell = grid.hx() * grid.hy();
    let mut max = 0.0_f64;
    let mut sum = 0.0_f64;
    let p = spec.p;
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let mut r = v.at(ix, iy) - rhs.at(ix, iy);
            for (idx, a) in &coeffs {
                r += a.at(ix, iy) * sol.derivs[idx].at(ix, iy);
            }
            match p {
                Exponent::Infinity => max = max.max(r.abs()),
                Exponent::Finite(pv) => sum += r.abs().powf(pv) * cell,
            }
        }
    }
    Ok(match p {
        Exponent::Infinity => max,
        Exponent::Finite(pv) => sum.powf(1.0 / pv),
    })
}
