//! Qualitative analysis of polynomial vector fields on R³.
//!
//! The crate locates and classifies equilibria, computes the Poincaré index
//! at infinity as a sphere-map degree, studies the velocity level sets
//! `{F_i = 0}` and their tangency curves, and traces the one-dimensional
//! invariant manifolds of saddle foci out to infinity.

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod flowkit;
pub mod level_sets;
pub mod linalg;
pub mod manifolds;
pub mod polyfield;
pub mod report;
pub mod sphere_degree;
pub mod theorem_engine;

pub use error::{Error, Result};
pub use linalg::{Mat3, Vec3};
pub use polyfield::{parse_system, zoo, Monomial, PolyVectorField, SystemId, TriPolynomial};
