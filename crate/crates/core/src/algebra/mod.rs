//! Graded-commutative polynomial algebra over jet coordinates.

mod poly;
mod symbol;

pub use poly::{
    graded_mul, normalize, q, q_frac, GradedPoly, Grading, GradingReport, Monomial, RawSymbol, Q,
};
pub use symbol::{
    BaseSpace, Components, GradedVariableDecl, Index, IndexBlock, JetSymbol, MultiIndex, Parity,
    Registry, Symmetry, VarId, VarKind,
};
