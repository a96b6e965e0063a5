//! Error type shared by all modules of the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not an automorphism of the lattice: {0}")]
    NotAnAutomorphism(String),
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("maps do not commute")]
    NotCommuting,
    #[error("division by zero in cyclotomic field")]
    DivisionByZero,
    #[error("value is not a root of unity: {0}")]
    NotARootOfUnity(String),
    #[error("lattice is not even")]
    OddLattice,
    #[error("phase does not lie in the working cyclotomic field: {0}")]
    ConductorOverflow(String),
    #[error("splitting obstruction is non-zero: f != 1 on {0}")]
    ObstructionNonzero(String),
    #[error("lift doubles the order of {0}")]
    OrderDoubled(String),
    #[error("vector is not in the coinvariant sublattice")]
    NotCoinvariant,
    #[error("commutator form is degenerate")]
    DegenerateForm,
    #[error("|N| is not a perfect square: {0}")]
    NonSquareQuotient(String),
    #[error("intertwiner solution space is not one-dimensional: {0}")]
    SolutionSpaceNotOneDim(String),
    #[error("centralizer action has a projective obstruction: {0}")]
    ProjectiveObstruction(String),
    #[error("orbifold is anomalous: {0}")]
    AnomalousOrbifold(String),
    #[error("series truncation too shallow for requested tolerance (tail bound {0})")]
    InsufficientTruncation(f64),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("validation failed: {0}")]
    ValidationError(String),
    #[error("internal consistency check failed: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
