//! Core problem and grid types shared by every other module.
//!
//! The operator under study acts on a rectangle `[0, h1] x [0, h2]` and
//! has the form
//!
//! ```text
//! D_x^4 D_y^2 u  +  sum over (i, j) != (4, 2) of  a_ij(x, y) D_x^i D_y^j u  =  z(x, y)
//! ```
//!
//! with `0 <= i <= 4`, `0 <= j <= 2` and the principal coefficient fixed
//! at one. Boundary data anchor at the *final* corner `(h1, h2)`: either
//! six classical functions on the far faces, or the non-classical set of
//! eight corner scalars plus six edge traces of the highest derivatives.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};

/// Lebesgue exponent used for discrete norms in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Index of a mixed derivative `D_x^i D_y^j`.
pub type DerivIndex = (usize, usize);

/// All 15 derivative indices `i = 0..=4`, `j = 0..=2`, in lexicographic
/// order.
pub fn all_deriv_indices() -> impl Iterator<Item = DerivIndex> {
    (0..=4usize).flat_map(|i| (0..=2usize).map(move |j| (i, j)))
}

/// Problem specification: domain extents, norm exponent, lower-order
/// coefficients and the right-hand side.
///
/// Coefficients absent from the map are identically zero. The map may
/// hold out-of-range indices so that [`validate_spec`] can report them.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub h1: f64,
    pub h2: f64,
    pub p: Exponent,
    pub coeffs: BTreeMap<DerivIndex, Expr>,
    pub rhs: Expr,
}

impl ProblemSpec {
    /// A spec with the given extents, no lower-order coefficients and a
    /// zero right-hand side.
    pub fn homogeneous(h1: f64, h2: f64) -> Self {
        ProblemSpec {
            h1,
            h2,
            p: Exponent::Infinity,
            coeffs: BTreeMap::new(),
            rhs: Expr::zero(),
        }
    }
}

/// Regularity bucket a coefficient is declared to occupy, keyed purely on
/// its index. Informational: nothing is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityClass {
    /// `a_ij` with `i <= 3`, `j <= 1`: plain `L_p`.
    Lp,
    /// `a_4j`: bounded in `x`, `L_p` in `y`.
    BoundedInXLpInY,
    /// `a_i2`: `L_p` in `x`, bounded in `y`.
    LpInXBoundedInY,
}

impl fmt::Display for RegularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularityClass::Lp => write!(f, "L_p"),
            RegularityClass::BoundedInXLpInY => write!(f, "L^{{x,y}}_{{inf,p}}"),
            RegularityClass::LpInXBoundedInY => write!(f, "L^{{x,y}}_{{p,inf}}"),
        }
    }
}

/// Outcome of [`validate_spec`]: violated invariants plus an informational
/// classification of each in-range coefficient.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub coefficient_classes: Vec<(DerivIndex, RegularityClass)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant of a spec and report all violations
/// with human-readable reasons. Side-effect free and idempotent.
pub fn validate_spec(spec: &ProblemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !(spec.h1 > 0.0) {
        report
            .violations
            .push(format!("h1 must be positive (got {})", spec.h1));
    }
    if !(spec.h2 > 0.0) {
        report
            .violations
            .push(format!("h2 must be positive (got {})", spec.h2));
    }
    if let Exponent::Finite(p) = spec.p {
        if !(p >= 1.0) {
            report
                .violations
                .push(format!("p must be >= 1 or \"inf\" (got {p})"));
        }
    }
    for &(i, j) in spec.coeffs.keys() {
        if (i, j) == (4, 2) {
            report.violations.push(
                "principal coefficient is fixed at 1: a coefficient at index (4,2) must not be given"
                    .to_string(),
            );
        } else if i > 4 || j > 2 {
            report.violations.push(format!(
                "coefficient index ({i},{j}) out of range: need i <= 4, j <= 2"
            ));
        } else {
            let class = if i == 4 {
                RegularityClass::BoundedInXLpInY
            } else if j == 2 {
                RegularityClass::LpInXBoundedInY
            } else {
                RegularityClass::Lp
            };
            report.coefficient_classes.push(((i, j), class));
        }
    }
    report
}

/// Uniform tensor grid over the closed rectangle, with both endpoints as
/// nodes. The final corner `(h1, h2)` is always the last node pair: all
/// reconstruction formulas anchor there.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Grid {
    pub fn new(h1: f64, h2: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Data(format!(
                "grid extents must be positive (got h1={h1}, h2={h2})"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::Data(format!(
                "grids need at least 3 nodes per axis (got nx={nx}, ny={ny})"
            )));
        }
        // x_i = h1 * i/(nx-1) makes the last node equal h1 exactly
        let x = (0..nx)
            .map(|i| h1 * (i as f64) / ((nx - 1) as f64))
            .collect();
        let y = (0..ny)
            .map(|j| h2 * (j as f64) / ((ny - 1) as f64))
            .collect();
        Ok(Grid { x, y })
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.y
    }

    pub fn h1(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn h2(&self) -> f64 {
        *self.y.last().unwrap()
    }

    pub fn hx(&self) -> f64 {
        self.h1() / (self.nx() - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.h2() / (self.ny() - 1) as f64
    }

    /// Pointwise samples of an expression at every node.
    pub fn sample(&self, e: &Expr) -> Result<GridFunction> {
        let mut g = GridFunction::zeros(self.nx(), self.ny());
        for (iy, &y) in self.y.iter().enumerate() {
            for (ix, &x) in self.x.iter().enumerate() {
                let v = e.eval(x, y).map_err(|source| Error::SampleEval {
                    ix,
                    iy,
                    source: Box::new(source),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { ix, iy, x, y });
                }
                g.set(ix, iy, v);
            }
        }
        Ok(g)
    }
}

/// Sample an expression along one axis, holding the other variable fixed
/// (edge data live on an edge, so the companion variable is pinned there).
pub fn sample_axis(e: &Expr, nodes: &[f64], axis: Var, other: f64) -> Result<Vec<f64>> {
    nodes
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let (x, y) = match axis {
                Var::X => (t, other),
                Var::Y => (other, t),
            };
            let v = e.eval(x, y).map_err(|source| Error::SampleEval {
                ix: if axis == Var::X { k } else { 0 },
                iy: if axis == Var::Y { k } else { 0 },
                source: Box::new(source),
            })?;
            if !v.is_finite() {
                let (ix, iy) = if axis == Var::X { (k, 0) } else { (0, k) };
                return Err(Error::NonFiniteSample { ix, iy, x, y });
            }
            Ok(v)
        })
        .collect()
}

/// Values of a scalar field on a grid, stored row-major with `y` varying
/// slowest (`index = iy * nx + ix`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        GridFunction {
            nx,
            ny,
            values: vec![0.0; nx * ny],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        self.values[iy * self.nx + ix] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entry-wise difference.
    pub fn max_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A one-variable boundary function: either a closed-form expression or
/// plain node samples on the matching axis.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFn {
    Expr(Expr),
    Samples(Vec<f64>),
}

impl BoundaryFn {
    pub fn zero() -> Self {
        BoundaryFn::Expr(Expr::zero())
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            BoundaryFn::Expr(e) => Some(e),
            BoundaryFn::Samples(_) => None,
        }
    }

    /// Node values along `nodes`; expressions are evaluated with the
    /// companion variable bound to `other`, samples must match the node
    /// count exactly.
    pub fn sample(&self, nodes: &[f64], axis: Var, other: f64) -> Result<Vec<f64>> {
        match self {
            BoundaryFn::Expr(e) => sample_axis(e, nodes, axis, other),
            BoundaryFn::Samples(v) => {
                if v.len() != nodes.len() {
                    return Err(Error::Data(format!(
                        "sampled boundary function has {} values but the grid has {} nodes",
                        v.len(),
                        nodes.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Classical final-boundary data: four functions of `y` on the face
/// `x = h1` (the values of `u` and its first three `x`-derivatives) and
/// two functions of `x` on the face `y = h2` (`u` and its `y`-derivative).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalData {
    /// `phi[k]` is the trace of `D_x^k u` on `x = h1`, `k = 0..=3`.
    pub phi: [BoundaryFn; 4],
    /// `psi[k]` is the trace of `D_y^k u` on `y = h2`, `k = 0..=1`.
    pub psi: [BoundaryFn; 2],
}

impl ClassicalData {
    pub fn zero() -> Self {
        ClassicalData {
            phi: std::array::from_fn(|_| BoundaryFn::zero()),
            psi: std::array::from_fn(|_| BoundaryFn::zero()),
        }
    }

    /// Structural invariants: `phi` depend only on `y`, `psi` only on `x`.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (k, f) in self.phi.iter().enumerate() {
            if let BoundaryFn::Expr(e) = f {
                if e.uses_var(Var::X) {
                    v.push(format!("phi{} must depend on y only", k + 1));
                }
            }
        }
        for (k, f) in self.psi.iter().enumerate() {
            if let BoundaryFn::Expr(e) = f {
                if e.uses_var(Var::Y) {
                    v.push(format!("psi{} must depend on x only", k + 1));
                }
            }
        }
        v
    }
}

/// Non-classical final-boundary data: corner values of the mixed
/// derivatives up to order `(3, 1)` plus edge traces of the two highest
/// derivative families. Requires no agreement conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct NonClassicalData {
    /// `corner[i][j]` = `D_x^i D_y^j u(h1, h2)` for `i = 0..=3`, `j = 0..=1`.
    pub corner: [[f64; 2]; 4],
    /// `xedge[j]` = trace of `D_x^4 D_y^j u` on `y = h2`, a function of `x`.
    pub xedge: [BoundaryFn; 2],
    /// `yedge[i]` = trace of `D_x^i D_y^2 u` on `x = h1`, a function of `y`.
    pub yedge: [BoundaryFn; 4],
}

impl NonClassicalData {
    pub fn zero() -> Self {
        NonClassicalData {
            corner: [[0.0; 2]; 4],
            xedge: std::array::from_fn(|_| BoundaryFn::zero()),
            yedge: std::array::from_fn(|_| BoundaryFn::zero()),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (i, row) in self.corner.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_finite() {
                    v.push(format!("corner value Z_{i}{j} must be finite"));
                }
            }
        }
        for (j, f) in self.xedge.iter().enumerate() {
            if let BoundaryFn::Expr(e) = f {
                if e.uses_var(Var::Y) {
                    v.push(format!("x-edge function Z4{j} must depend on x only"));
                }
            }
        }
        for (i, f) in self.yedge.iter().enumerate() {
            if let BoundaryFn::Expr(e) = f {
                if e.uses_var(Var::X) {
                    v.push(format!("y-edge function Z{i}2 must depend on y only"));
                }
            }
        }
        v
    }
}

/// A solved problem: every mixed derivative `D_x^i D_y^j u` on the grid,
/// with `derivs[(4, 2)]` the fixed-point field itself, plus iteration
/// diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub derivs: BTreeMap<DerivIndex, GridFunction>,
    pub iterations: usize,
    pub final_update: f64,
}

impl SolutionField {
    /// The reconstructed solution `u` itself.
    pub fn u(&self) -> &GridFunction {
        &self.derivs[&(0, 0)]
    }

    /// The fixed-point field `v = D_x^4 D_y^2 u`.
    pub fn v(&self) -> &GridFunction {
        &self.derivs[&(4, 2)]
    }
}
