//! Closed-form laboratory for the self-adjoint extensions of half-line
//! Schrödinger operators: von Neumann (unitary) and Kreĭn–Višik–Birman
//! (relative, self-adjoint) labels, the `z = ±i eps` boundary maps, and the
//! `eps -> 0` limits that connect the two labellings.

pub mod calculus;
mod dd;
pub mod error;
pub mod experiments;
pub mod exppoly;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod tol;

pub use error::{Error, Result};
pub use exppoly::{BoundaryCondition, ExpPoly, ExpPolyTerm};
pub use linalg::{ComplexMatrix, InnerProductSpace};
pub use models::{Extension, HilbertElement, Model};

pub use num_complex::Complex64;
