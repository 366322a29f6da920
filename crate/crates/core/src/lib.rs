//! Exact polynomial algebra and numerical harnesses for the asymptotic
//! expansion of exterior solutions to special Lagrangian type equations.
//!
//! The algebraic core is generic over a [`Scalar`] type. Exact computations
//! use [`Rational`] (arbitrary precision), numerical ones use `f64`.

pub mod equations;
pub mod error;
pub mod exactalg;
pub mod expand;
pub mod io;
pub mod kelvin;
pub mod linalg;
pub mod radial;
pub mod random;
pub mod scalar;
pub mod symfun;

pub use error::{Error, Result};
pub use exactalg::{HomoPoly, MultiPoly, RadPoly};
pub use kelvin::{BranchKind, Jet2, KelvinFrame, PhaseBranch};
pub use linalg::SquareMatrix;
pub use scalar::Scalar;
pub use symfun::{BranchParams, Spectrum};

/// Arbitrary precision rational number.
pub type Rational = num_rational::BigRational;
/// Polynomial with exact rational coefficients.
pub type QPoly = MultiPoly<Rational>;
/// Homogeneous polynomial with exact rational coefficients.
pub type QHomoPoly = HomoPoly<Rational>;
/// Radical polynomial with exact rational coefficients.
pub type QRadPoly = RadPoly<Rational>;
/// Spectrum with exact rational eigenvalues.
pub type QSpectrum = Spectrum<Rational>;
/// Rational square matrix.
pub type QMatrix = SquareMatrix<Rational>;
/// Floating point square matrix.
pub type FMatrix = SquareMatrix<f64>;
