//! Numerical laboratory for elliptic operators with shifts `D = Σ D_k T^k` on flat tori.
//!
//! The crate evaluates operator-valued symbols, certifies ellipticity through
//! singular values of truncated symbol matrices, assembles spectral
//! discretizations of `D`, of the ladder operator `A = ∂_t + t` and of the
//! cylinder family `B_ε`, extracts Fredholm indices by singular-value gap
//! analysis, checks the uniformization transforms, and integrates the odd
//! Chern form over the cosphere bundle of the mapping torus.

pub mod cli;
pub mod discretize;
pub mod ellipticity;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod symbol;
pub mod topo;
pub mod uniformize;

pub use error::{Error, Result};
pub use faer::c64;
pub use operator::{FirstOrderCoefficient, ShiftOperatorSpec, TorusIsometry};
