//! Final-boundary value toolkit for a sixth-order pseudoparabolic operator
//! on a rectangle.
//!
//! The library handles the problem
//!
//! ```text
//! D_x^4 D_y^2 u + sum a_ij(x, y) D_x^i D_y^j u = z(x, y)   on (0, h1) x (0, h2)
//! ```
//!
//! with boundary data given at the far faces `x = h1`, `y = h2`. It
//! provides:
//!
//! - an expression language ([`expr`]) for coefficients and boundary data,
//!   with exact symbolic differentiation;
//! - exact two-way conversion ([`convert`]) between classical boundary
//!   functions (which must satisfy eight corner agreement conditions) and
//!   the agreement-free corner/edge data set, plus the agreement checker;
//! - reconstruction of every derivative field from the top derivative
//!   `v = D_x^4 D_y^2 u` by Taylor expansion with integral remainders
//!   anchored at the final corner ([`taylor`]);
//! - a Picard fixed-point solver for the Volterra-type integral equation
//!   the corner/edge problem reduces to ([`solver`]);
//! - manufactured-solution generation and convergence studies ([`mms`]);
//! - a JSON problem-file format and CLI front end ([`problem_file`],
//!   [`cli`]).

pub mod cli;
pub mod convert;
pub mod domain;
pub mod error;
pub mod expr;
pub mod mms;
pub mod problem_file;
pub mod solver;
pub mod taylor;

pub use error::{Error, Result};
