//! Sparse bounded-variable linear programs and a dense-inverse revised
//! simplex solver sized for small and medium LPs.

mod model;
mod mps;
mod simplex;

pub use model::{BoundedLP, Relation, Row, Sense};
pub use mps::write_mps;
pub use simplex::{solve_lp, LPSolution, Status};

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("invalid LP: {0}")]
    Invalid(String),
    #[error("numerical breakdown after {iterations} iterations: {reason}")]
    NumericalBreakdown { iterations: usize, reason: String },
}
