use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series cap mismatch: {left} vs {right}")]
    CapMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("series is identically zero mod t^{}", cap + 1)]
    DegenerateSeries { cap: usize },

    #[error("series has no inverse: constant term is zero")]
    NotInvertible,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("{x} is outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: String, lo: String, hi: String },

    #[error("{y} is outside the image [{lo}, {hi}]")]
    OutsideImage { y: String, lo: String, hi: String },

    #[error("node budget of {budget} exceeded after {completed_levels} complete levels")]
    BudgetExceeded { budget: u64, completed_levels: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("determinant depends on the deleted column ({first} vs {second}); this is a bug")]
    ColumnDependence { first: usize, second: usize },

    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("shape violation: {0}")]
    ShapeViolation(String),
}
