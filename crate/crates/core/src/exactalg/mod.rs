//! Exact multivariate polynomials, radical polynomials `Σ |y|^k p_k(y)` and
//! the radical Poisson solver.

mod poisson;
mod poly;
mod radpoly;

pub use poisson::{monomials_of_degree, solve_radical_poisson};
pub use poly::{poly_laplacian, HomoPoly, MultiPoly};
pub use radpoly::{radpoly_laplacian, RadPoly};
