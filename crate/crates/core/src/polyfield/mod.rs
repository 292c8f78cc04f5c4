//! Sparse trivariate polynomials, vector fields built from them, the
//! system-definition parser and the built-in model zoo.

mod field;
mod parse;
mod poly;
mod zoo;

pub use field::PolyVectorField;
pub use parse::{parse_system, parse_system_with, ParseError, ParseErrorKind};
pub use poly::{Exponents, Monomial, TriPolynomial, COEFF_EPS, MAX_DEGREE};
pub use zoo::{zoo, zoo_entry, ParamSpec, Range, SystemId, ZooEntry};
