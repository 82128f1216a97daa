//! Exact graded variational calculus on jet coordinates: Koszul–Tate
//! complexes of Noether identities, gauge supersymmetries from the ascent
//! operator, and truncated homology over the rationals.

pub mod algebra;
pub mod dsl;
pub mod error;
pub mod homology;
pub mod jet;
pub mod koszul;
pub mod linalg;
pub mod model;
pub mod report;
pub mod zoo;

pub use error::{Error, Result};
