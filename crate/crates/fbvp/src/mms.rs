//! Manufactured solutions and convergence studies.
//!
//! Pick an exact field `u*`, push it through the operator symbolically to
//! obtain the forcing term, and read its traces off as boundary data.
//! Solving the resulting problem and comparing against `u*` then measures
//! pure discretization error, and refining the grid exposes the
//! convergence order (second order for the product-trapezoid quadrature
//! used throughout).

use crate::convert::{check_agreement, classical_to_nonclassical};
use crate::domain::{
    validate_spec, BoundaryFn, ClassicalData, Grid, NonClassicalData, ProblemSpec,
};
use crate::error::{Error, Result};
use crate::expr::{build, differentiate, substitute, Expr, Var};
use crate::solver::{picard_solve, SolverConfig};

/// A problem whose exact solution is known by construction: the forcing
/// term equals the operator applied to `u_star`, and both boundary-data
/// flavors are exact traces of `u_star`.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub u_star: Expr,
    pub spec: ProblemSpec,
    pub nc: NonClassicalData,
    pub cd: ClassicalData,
}

/// Build a manufactured problem from an exact field and a base spec whose
/// coefficients are kept (its right-hand side is overwritten).
///
/// `u_star` must be symbolically differentiable to order `(4, 2)`, so it
/// cannot contain `step`; coefficients may (they are only multiplied in).
pub fn manufacture(u_star: &Expr, base_spec: &ProblemSpec) -> Result<ManufacturedProblem> {
    let report = validate_spec(base_spec);
    if !report.is_valid() {
        return Err(Error::InvalidSpec {
            violations: report.violations,
        });
    }
    let (h1, h2) = (base_spec.h1, base_spec.h2);

    // all mixed derivatives of u* up to (4, 2)
    let mut du: Vec<Vec<Expr>> = Vec::with_capacity(5);
    for i in 0..=4usize {
        let base = if i == 0 {
            u_star.clone()
        } else {
            differentiate(&du[i - 1][0], Var::X, 1)?
        };
        let mut row = vec![base];
        for j in 1..=2usize {
            let next = differentiate(&row[j - 1], Var::Y, 1)?;
            row.push(next);
        }
        du.push(row);
    }

    // forcing term: top derivative plus every coefficient times its field
    let mut rhs = du[4][2].clone();
    for (&(i, j), a) in &base_spec.coeffs {
        rhs = build::add(rhs, build::mul(a.clone(), du[i][j].clone()));
    }

    let mut nc = NonClassicalData::zero();
    for i in 0..4 {
        for j in 0..2 {
            nc.corner[i][j] = du[i][j].eval(h1, h2)?;
        }
        nc.yedge[i] = BoundaryFn::Expr(substitute(&du[i][2], Var::X, h1));
    }
    for j in 0..2 {
        nc.xedge[j] = BoundaryFn::Expr(substitute(&du[4][j], Var::Y, h2));
    }

    let mut cd = ClassicalData::zero();
    for i in 0..4 {
        cd.phi[i] = BoundaryFn::Expr(substitute(&du[i][0], Var::X, h1));
    }
    for j in 0..2 {
        cd.psi[j] = BoundaryFn::Expr(substitute(&du[0][j], Var::Y, h2));
    }

    let mut spec = base_spec.clone();
    spec.rhs = rhs;
    Ok(ManufacturedProblem {
        u_star: u_star.clone(),
        spec,
        nc,
        cd,
    })
}

/// One grid level of a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct StudyRow {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub max_err: f64,
    /// Observed order against the previous row; empty on the first row or
    /// when an error underflows to zero.
    pub order: Option<f64>,
}

/// Manufacture once, then solve on each grid size and measure the
/// max-norm error of `u` against `u_star`. The observed order between
/// consecutive rows is `ln(e_coarse/e_fine) / ln(h_coarse/h_fine)`, which
/// for the intended nested (doubling) grids is `log2` of the error ratio.
pub fn convergence_study(
    u_star: &Expr,
    base_spec: &ProblemSpec,
    grid_sizes: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<StudyRow>> {
    let mp = manufacture(u_star, base_spec)?;
    let mut rows: Vec<StudyRow> = Vec::with_capacity(grid_sizes.len());
    let mut prev: Option<(f64, f64)> = None;
    for &n in grid_sizes {
        let annotate = |source: Error| Error::StudyGrid {
            n,
            source: Box::new(source),
        };
        let grid = Grid::new(base_spec.h1, base_spec.h2, n, n).map_err(annotate)?;
        let sol = picard_solve(&mp.spec, &mp.nc, &grid, cfg).map_err(annotate)?;
        let exact = grid.sample(u_star).map_err(annotate)?;
        let max_err = sol.u().max_diff(&exact);
        let h = grid.hx().max(grid.hy());
        let order = prev.and_then(|(hp, ep)| {
            if ep > 0.0 && max_err > 0.0 && hp > h {
                Some((ep / max_err).ln() / (hp / h).ln())
            } else {
                None
            }
        });
        rows.push(StudyRow {
            h,
            nx: n,
            ny: n,
            max_err,
            order,
        });
        prev = Some((h, max_err));
    }
    Ok(rows)
}

/// Consistency checks a manufactured problem satisfies by construction;
/// exposed for reuse in tests and diagnostics.
pub fn trace_consistency(mp: &ManufacturedProblem, grid: &Grid) -> Result<f64> {
    let derived = classical_to_nonclassical(&mp.cd, &mp.spec)?;
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..2 {
            worst = worst.max((derived.corner[i][j] - mp.nc.corner[i][j]).abs());
        }
    }
    for j in 0..2 {
        let a = derived.xedge[j].sample(grid.x_nodes(), Var::X, mp.spec.h2)?;
        let b = mp.nc.xedge[j].sample(grid.x_nodes(), Var::X, mp.spec.h2)?;
        for (va, vb) in a.iter().zip(&b) {
            worst = worst.max((va - vb).abs());
        }
    }
    for i in 0..4 {
        let a = derived.yedge[i].sample(grid.y_nodes(), Var::Y, mp.spec.h1)?;
        let b = mp.nc.yedge[i].sample(grid.y_nodes(), Var::Y, mp.spec.h1)?;
        for (va, vb) in a.iter().zip(&b) {
            worst = worst.max((va - vb).abs());
        }
    }
    let agreement = check_agreement(&mp.cd, &mp.spec)?;
    Ok(worst.max(agreement.max_abs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::solver::residual_norm;
    use crate::taylor::reconstruct;

    fn cfg(tol: f64) -> SolverConfig {
        SolverConfig { tol, max_iter: 200 }
    }

    #[test]
    fn constant_solution_with_zero_coefficients() {
        let mp = manufacture(&parse("1").unwrap(), &ProblemSpec::homogeneous(1.0, 1.0)).unwrap();
        let grid = Grid::new(1.0, 1.0, 9, 9).unwrap();
        assert_eq!(grid.sample(&mp.spec.rhs).unwrap().max_abs(), 0.0);
        assert_eq!(mp.nc.corner[0][0], 1.0);
        let mut rest = 0.0_f64;
        for i in 0..4 {
            for j in 0..2 {
                if (i, j) != (0, 0) {
                    rest = rest.max(mp.nc.corner[i][j].abs());
                }
            }
        }
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn normalized_quartic_has_unit_forcing() {
        // u* = x^4 y^2 / 48: top derivative is exactly 1
        let mp = manufacture(
            &parse("x^4*y^2/48").unwrap(),
            &ProblemSpec::homogeneous(1.0, 1.0),
        )
        .unwrap();
        let grid = Grid::new(1.0, 1.0, 9, 9).unwrap();
        let rhs = grid.sample(&mp.spec.rhs).unwrap();
        for iy in 0..9 {
            for ix in 0..9 {
                assert!((rhs.at(ix, iy) - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn a32_coefficient_adds_the_third_derivative() {
        // with a_32 = 1, the forcing becomes 1 + x
        let mut base = ProblemSpec::homogeneous(1.0, 1.0);
        base.coeffs.insert((3, 2), Expr::one());
        let mp = manufacture(&parse("x^4*y^2/48").unwrap(), &base).unwrap();
        let grid = Grid::new(1.0, 1.0, 9, 9).unwrap();
        let rhs = grid.sample(&mp.spec.rhs).unwrap();
        for iy in 0..9 {
            for (ix, &x) in grid.x_nodes().iter().enumerate() {
                assert!((rhs.at(ix, iy) - (1.0 + x)).abs() < 1e-13, "({ix},{iy})");
            }
        }
    }

    #[test]
    fn step_in_u_star_is_rejected() {
        assert!(matches!(
            manufacture(
                &parse("step(x-0.5)").unwrap(),
                &ProblemSpec::homogeneous(1.0, 1.0)
            ),
            Err(Error::StepDerivative { .. })
        ));
    }

    #[test]
    fn manufactured_traces_are_consistent() {
        let mut base = ProblemSpec::homogeneous(1.0, 1.0);
        base.coeffs.insert((0, 0), Expr::one());
        base.coeffs.insert((3, 2), parse("x").unwrap());
        let mp = manufacture(&parse("sin(x)*cos(y)").unwrap(), &base).unwrap();
        let grid = Grid::new(1.0, 1.0, 17, 17).unwrap();
        let worst = trace_consistency(&mp, &grid).unwrap();
        assert!(worst <= 1e-12, "trace discrepancy {worst}");
    }

    #[test]
    fn zero_coefficient_solution_equals_pure_reconstruction() {
        let mp = manufacture(
            &parse("sin(x)*cos(y)").unwrap(),
            &ProblemSpec::homogeneous(1.0, 1.0),
        )
        .unwrap();
        let grid = Grid::new(1.0, 1.0, 17, 17).unwrap();
        let sol = picard_solve(&mp.spec, &mp.nc, &grid, &cfg(1e-12)).unwrap();
        let v = grid.sample(&mp.spec.rhs).unwrap();
        let direct = reconstruct(0, 0, &v, &mp.nc, &grid).unwrap();
        assert_eq!(sol.u(), &direct);
    }

    #[test]
    fn bilinear_solution_is_exact() {
        // all quadrature integrands vanish identically for u* = x y
        let mp = manufacture(&parse("x*y").unwrap(), &ProblemSpec::homogeneous(1.0, 1.0)).unwrap();
        let rows = convergence_study(
            &parse("x*y").unwrap(),
            &ProblemSpec::homogeneous(1.0, 1.0),
            &[9, 17],
            &cfg(1e-13),
        )
        .unwrap();
        for row in &rows {
            assert!(row.max_err <= 1e-13, "error {}", row.max_err);
        }
        // the manufactured data themselves: forcing 0, four unit corners
        assert_eq!(mp.nc.corner[0][0], 1.0);
        assert_eq!(mp.nc.corner[1][1], 1.0);
    }

    #[test]
    fn smooth_problem_converges_at_second_order() {
        let mut base = ProblemSpec::homogeneous(1.0, 1.0);
        base.coeffs.insert((0, 0), Expr::one());
        let rows = convergence_study(
            &parse("sin(x)*cos(y)").unwrap(),
            &base,
            &[17, 33, 65],
            &cfg(1e-12),
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].order.is_none());
        let last = rows.last().unwrap().order.expect("order on finest pair");
        assert!((last - 2.0).abs() < 0.2, "observed order {last}");
    }

    #[test]
    fn single_grid_study_has_empty_order() {
        let rows = convergence_study(
            &parse("x*y").unwrap(),
            &ProblemSpec::homogeneous(1.0, 1.0),
            &[17],
            &cfg(1e-12),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].order.is_none());
    }

    #[test]
    fn solver_failures_carry_the_grid_size() {
        let mut base = ProblemSpec::homogeneous(1.0, 1.0);
        base.coeffs.insert((0, 0), Expr::one());
        let err = convergence_study(
            &parse("sin(x)*cos(y)").unwrap(),
            &base,
            &[17],
            &SolverConfig {
                tol: 1e-12,
                max_iter: 1,
            },
        )
        .unwrap_err();
        match err {
            Error::StudyGrid { n, source } => {
                assert_eq!(n, 17);
                assert!(matches!(*source, Error::NonConvergence { .. }));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn manufactured_problem_residual_is_small_after_solving() {
        let mut base = ProblemSpec::homogeneous(1.0, 1.0);
        base.p = crate::domain::Exponent::Finite(2.0);
        base.coeffs.insert((0, 0), parse("step(x-0.5)").unwrap());
        let mp = manufacture(&parse("sin(x)*cos(y)").unwrap(), &base).unwrap();
        let grid = Grid::new(1.0, 1.0, 33, 33).unwrap();
        let sol = picard_solve(&mp.spec, &mp.nc, &grid, &cfg(1e-12)).unwrap();
        let res = residual_norm(&mp.spec, &sol, &grid).unwrap();
        assert!(res <= 1e-10, "residual {res}");
    }
}
