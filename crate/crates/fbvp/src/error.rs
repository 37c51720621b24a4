//! Crate-wide error type.

use thiserror::Error;

use crate::expr::Var;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Syntax error in an expression source string.
    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },

    /// Evaluation hit an exact-zero denominator.
    #[error("division by zero while evaluating at (x, y) = ({x}, {y})")]
    DivisionByZero { x: f64, y: f64 },

    /// Sampling produced a non-finite value at a grid node.
    #[error("non-finite value at node ({ix}, {iy}), point (x, y) = ({x}, {y})")]
    NonFiniteSample { ix: usize, iy: usize, x: f64, y: f64 },

    /// Evaluation error localized to a grid node.
    #[error("evaluation failed at node ({ix}, {iy}): {source}")]
    SampleEval {
        ix: usize,
        iy: usize,
        #[source]
        source: Box<Error>,
    },

    /// `step(...)` cannot be differentiated along a variable its argument
    /// depends on.
    #[error("cannot differentiate step(...) with respect to {var}: the jump leaves the expression language")]
    StepDerivative { var: Var },

    /// Malformed or inconsistent problem data.
    #[error("invalid data: {0}")]
    Data(String),

    /// The problem specification failed validation.
    #[error("invalid problem specification: {}", .violations.join("; "))]
    InvalidSpec { violations: Vec<String> },

    /// Picard iteration hit the iteration cap before the update dropped
    /// below tolerance. Carries the full sup-norm update history.
    #[error("no convergence after {iterations} Picard iterations (last update {last:e}, tolerance {tol:e})",
            last = .history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        tol: f64,
        history: Vec<f64>,
    },

    /// The iteration produced NaN or infinite values.
    #[error("Picard iteration diverged (non-finite update at iteration {iteration})")]
    Divergence { iteration: usize, history: Vec<f64> },

    /// A convergence-study step failed; carries the grid size.
    #[error("convergence study at grid {n}x{n}: {source}")]
    StudyGrid {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}
